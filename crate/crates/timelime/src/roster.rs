//! The eight public defect projects and the three releases used for each.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RosterEntry {
    pub project: &'static str,
    /// Releases x, y, z; z is the validation release.
    pub versions: [&'static str; 3],
    /// Files over all three releases.
    pub files: usize,
    /// Defective files over all three releases.
    pub buggy: usize,
}

pub const ROSTER: [RosterEntry; 8] = [
    RosterEntry { project: "jedit", versions: ["4.0", "4.1", "4.2"], files: 985, buggy: 233 },
    RosterEntry { project: "camel", versions: ["1.2", "1.4", "1.6"], files: 2445, buggy: 506 },
    RosterEntry { project: "xalan", versions: ["2.5", "2.6", "2.7"], files: 2597, buggy: 1209 },
    RosterEntry { project: "ant", versions: ["1.5", "1.6", "1.7"], files: 1389, buggy: 216 },
    RosterEntry { project: "lucene", versions: ["2.0", "2.2", "2.4"], files: 782, buggy: 379 },
    RosterEntry { project: "velocity", versions: ["1.4", "1.5", "1.6"], files: 639, buggy: 431 },
    RosterEntry { project: "poi", versions: ["1.5", "2.5", "3.0"], files: 1064, buggy: 637 },
    RosterEntry { project: "synapse", versions: ["1.0", "1.1", "1.2"], files: 635, buggy: 136 },
];

pub fn lookup(project: &str) -> Option<&'static RosterEntry> {
    ROSTER.iter().find(|e| e.project.eq_ignore_ascii_case(project))
}
