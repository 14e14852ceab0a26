fn main() {
    print!("{}", wban_sim::harness::scenario::channel_to_toml(&wban_sim::channel::defaults::synthetic_default()));
}
