use std::fmt;
use std::str::FromStr;

/// On-body sensor location. The chest node is the sink.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeSite {
    Head,
    Chest,
    UpperArm,
    Wrist,
    Navel,
    Thigh,
    Ankle,
}

pub const NODE_COUNT: usize = 7;

impl NodeSite {
    pub const ALL: [NodeSite; NODE_COUNT] = [
        NodeSite::Head,
        NodeSite::Chest,
        NodeSite::UpperArm,
        NodeSite::Wrist,
        NodeSite::Navel,
        NodeSite::Thigh,
        NodeSite::Ankle,
    ];

    pub const SINK: NodeSite = NodeSite::Chest;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<NodeSite> {
        Self::ALL.get(i).copied()
    }

    pub fn is_sink(self) -> bool {
        self == Self::SINK
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeSite::Head => "head",
            NodeSite::Chest => "chest",
            NodeSite::UpperArm => "upper_arm",
            NodeSite::Wrist => "wrist",
            NodeSite::Navel => "navel",
            NodeSite::Thigh => "thigh",
            NodeSite::Ankle => "ankle",
        }
    }

    pub fn others(self) -> impl Iterator<Item = NodeSite> {
        Self::ALL.into_iter().filter(move |&n| n != self)
    }
}

impl fmt::Display for NodeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NodeSite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| format!("unknown node site `{s}`"))
    }
}

/// Set of node sites as a 7-bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct NodeSet(u8);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);
    pub const ALL: NodeSet = NodeSet((1 << NODE_COUNT) - 1);

    pub fn single(n: NodeSite) -> Self {
        NodeSet(1 << n.index())
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, n: NodeSite) -> bool {
        self.0 & (1 << n.index()) != 0
    }

    /// Returns true if `n` was newly added.
    pub fn insert(&mut self, n: NodeSite) -> bool {
        let had = self.contains(n);
        self.0 |= 1 << n.index();
        !had
    }

    pub fn remove(&mut self, n: NodeSite) {
        self.0 &= !(1 << n.index());
    }

    pub fn with(mut self, n: NodeSite) -> Self {
        self.insert(n);
        self
    }

    pub fn union(self, other: NodeSet) -> Self {
        NodeSet(self.0 | other.0)
    }

    pub fn complement(self) -> Self {
        NodeSet(!self.0 & Self::ALL.0)
    }

    pub fn is_superset(self, other: NodeSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_full(self) -> bool {
        self == Self::ALL
    }

    pub fn iter(self) -> impl Iterator<Item = NodeSite> {
        NodeSite::ALL.into_iter().filter(move |&n| self.contains(n))
    }
}

impl FromIterator<NodeSite> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeSite>>(iter: I) -> Self {
        let mut s = NodeSet::EMPTY;
        for n in iter {
            s.insert(n);
        }
        s
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|n| n.name())).finish()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(|n| n.name()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Wearer posture; fixed for the duration of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Posture {
    Walk,
    Weak,
    Run,
    Sit,
    Wear,
    Sleep,
    Lie,
}

impl Posture {
    pub const ALL: [Posture; 7] = [
        Posture::Walk,
        Posture::Weak,
        Posture::Run,
        Posture::Sit,
        Posture::Wear,
        Posture::Sleep,
        Posture::Lie,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Posture::Walk => "walk",
            Posture::Weak => "weak",
            Posture::Run => "run",
            Posture::Sit => "sit",
            Posture::Wear => "wear",
            Posture::Sleep => "sleep",
            Posture::Lie => "lie",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Posture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Posture {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown posture `{s}`"))
    }
}
