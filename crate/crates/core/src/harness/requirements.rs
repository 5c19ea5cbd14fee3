/// Accuracy/confidence bands a positioning service may be required to meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequirementSet {
    pub name: &'static str,
    /// Horizontal accuracy band, meters `(best, worst)`.
    pub accuracy: (f64, f64),
    /// Required fraction of fixes within the accuracy, `(lower, upper)`.
    pub confidence: (f64, f64),
}

impl RequirementSet {
    /// A set is met when at least the lower confidence fraction of errors falls within
    /// the loosest accuracy of the band.
    pub fn is_met(&self, fraction_within: f64) -> bool {
        fraction_within >= self.confidence.0
    }
}

pub const REQUIREMENT_SETS: [RequirementSet; 3] = [
    RequirementSet {
        name: "set1",
        accuracy: (10.0, 50.0),
        confidence: (0.68, 0.95),
    },
    RequirementSet {
        name: "set2",
        accuracy: (1.0, 3.0),
        confidence: (0.95, 0.99),
    },
    RequirementSet {
        name: "set3",
        accuracy: (0.1, 0.5),
        confidence: (0.95, 0.99),
    },
];
