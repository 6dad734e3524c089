//! Published reference values. Cells are `[P, R, F1, ±]` in percent; each
//! column lists rows in `Family::ALL` order (LR, SVM, BIO, Keyword, All-1s).

use crate::corpus::Topic;

pub type Cell = [f64; 4];
pub type Column = [Cell; 5];

pub const TABLE5: &[Column] = &[
    [[63.2, 79.9, 70.3, 1.9], [67.2, 72.2, 69.5, 1.9], [46.2, 85.2, 59.8, 2.0], [53.0, 32.1, 39.9, 2.0], [32.7, 100.0, 49.3, 2.1]],
    [[62.5, 76.4, 67.7, 4.2], [70.4, 72.2, 70.7, 4.1], [46.8, 94.2, 61.6, 4.4], [56.9, 38.8, 45.0, 4.5], [24.3, 100.0, 38.7, 4.4]],
    [[72.8, 86.2, 78.2, 3.8], [79.8, 84.7, 82.1, 3.6], [64.6, 99.1, 78.2, 3.8], [86.2, 29.3, 43.1, 4.6], [51.2, 100.0, 67.7, 4.3]],
    [[77.5, 83.9, 80.1, 3.7], [80.2, 87.2, 83.5, 3.4], [64.9, 98.3, 78.1, 3.8], [86.2, 29.8, 43.5, 4.6], [50.8, 100.0, 67.3, 4.3]],
];

pub const TABLE6: &[Column] = &[
    [[47.0, 61.9, 53.4, 4.5], [43.7, 83.2, 57.3, 4.5], [44.1, 78.8, 56.5, 4.5], [56.8, 37.2, 44.9, 4.5], [24.2, 100.0, 39.0, 4.4]],
    [[37.9, 84.4, 52.3, 2.1], [42.1, 63.5, 50.7, 2.1], [39.6, 83.7, 53.8, 2.1], [52.9, 32.0, 39.9, 2.0], [32.7, 100.0, 49.3, 2.1]],
];

pub const TABLE7: &[Column] = &[
    [[78.3, 31.4, 44.9, 4.6], [66.8, 93.9, 78.0, 3.8], [66.8, 86.9, 75.5, 4.0], [86.1, 29.7, 44.2, 4.6], [51.2, 100.0, 67.8, 4.3]],
    [[76.1, 30.8, 43.9, 4.6], [66.5, 94.3, 78.0, 3.8], [67.1, 88.1, 76.2, 3.9], [86.1, 30.0, 44.4, 4.6], [50.8, 100.0, 67.4, 4.3]],
    [[44.8, 63.8, 52.6, 2.3], [36.5, 91.0, 52.1, 2.3], [39.1, 80.2, 52.6, 2.3], [48.5, 31.2, 38.0, 2.2], [31.7, 100.0, 48.1, 2.3]],
    [[42.7, 63.4, 51.0, 2.3], [40.8, 76.3, 53.1, 2.3], [39.4, 76.6, 52.0, 2.3], [48.5, 31.2, 38.0, 2.2], [31.7, 100.0, 48.1, 2.3]],
];

pub const TABLE8: &[Column] = &[
    [[63.5, 87.3, 73.5, 4.1], [65.7, 62.0, 63.8, 4.5], [63.9, 82.1, 71.9, 4.2], [86.1, 29.7, 44.2, 4.6], [51.2, 100.0, 67.8, 4.3]],
    [[63.5, 88.1, 73.8, 4.1], [67.6, 64.3, 65.9, 4.4], [63.9, 82.8, 72.2, 4.2], [86.1, 30.0, 44.4, 4.6], [50.8, 100.0, 67.4, 4.3]],
    [[46.3, 77.0, 57.8, 4.5], [36.2, 98.2, 52.9, 4.5], [41.6, 87.6, 56.4, 4.5], [56.8, 37.2, 44.9, 4.5], [24.2, 100.0, 39.0, 4.4]],
    [[46.2, 79.6, 58.4, 4.5], [42.1, 90.3, 57.5, 4.5], [42.4, 84.1, 56.4, 4.5], [56.8, 37.2, 44.9, 4.5], [24.2, 100.0, 39.0, 4.4]],
];

pub const TABLE9: &[Column] = &[
    [[61.7, 74.7, 67.4, 1.8], [62.8, 71.8, 66.9, 1.8], [45.8, 71.4, 55.6, 1.9], [51.0, 32.1, 39.3, 1.9], [29.1, 100.0, 45.0, 1.9]],
    [[52.9, 63.7, 57.8, 4.5], [45.6, 77.9, 57.5, 4.5], [47.5, 76.1, 58.5, 4.5], [56.8, 37.2, 44.9, 4.5], [24.2, 100.0, 39.0, 4.4]],
    [[40.0, 63.8, 49.2, 2.1], [31.7, 91.0, 47.0, 2.1], [34.0, 80.2, 47.8, 2.1], [46.6, 31.2, 37.4, 2.1], [27.3, 100.0, 42.9, 2.1]],
];

pub const TABLE10: &[Column] = &[
    [[65.3, 75.9, 70.1, 2.0], [72.0, 68.9, 70.4, 2.0], [53.0, 77.3, 62.2, 2.1], [55.0, 32.1, 40.5, 2.2], [37.8, 100.0, 54.8, 2.2]],
    [[38.9, 48.9, 43.3, 2.2], [40.0, 51.3, 44.9, 2.2], [41.0, 73.0, 52.5, 2.2], [55.2, 32.2, 40.7, 2.2], [37.8, 100.0, 54.9, 2.2]],
    [[79.9, 57.0, 66.5, 4.9], [79.4, 43.5, 56.2, 5.2], [75.9, 70.0, 72.9, 4.7], [93.2, 29.6, 44.9, 5.2], [65.7, 100.0, 79.3, 4.2]],
    [[67.2, 72.2, 69.6, 4.8], [66.6, 95.2, 78.4, 4.3], [67.6, 55.2, 60.8, 5.1], [93.2, 29.6, 44.9, 5.2], [65.7, 100.0, 79.3, 4.2]],
];

pub fn table_columns(id: u8) -> Option<&'static [Column]> {
    match id {
        5 => Some(TABLE5),
        6 => Some(TABLE6),
        7 => Some(TABLE7),
        8 => Some(TABLE8),
        9 => Some(TABLE9),
        10 => Some(TABLE10),
        _ => None,
    }
}

/// Topic hold-out rows: topic, paragraphs, then `[F1, ±]` per family.
pub const TABLE11: &[(Topic, usize, [[f64; 2]; 5])] = &[
    (Topic::Drugs, 699, [[25.4, 3.2], [44.4, 3.7], [55.2, 3.7], [22.4, 3.1], [51.6, 3.7]]),
    (Topic::Health, 297, [[55.2, 5.7], [47.7, 5.7], [41.1, 5.6], [41.8, 5.6], [37.7, 5.5]]),
    (Topic::TaxProposals, 253, [[54.3, 6.1], [61.8, 6.0], [57.7, 6.1], [60.0, 6.0], [54.6, 6.1]]),
    (Topic::Welfare, 245, [[51.3, 6.3], [39.3, 6.1], [38.5, 6.1], [31.5, 5.8], [38.3, 6.1]]),
    (Topic::ChildSupport, 216, [[59.3, 6.6], [44.0, 6.6], [39.3, 6.5], [54.0, 6.6], [29.2, 6.1]]),
    (Topic::Service, 198, [[62.0, 6.8], [56.6, 6.9], [54.0, 6.9], [40.0, 6.8], [53.9, 6.9]]),
    (Topic::MiscellaneousEmails, 188, [[62.9, 6.9], [50.7, 7.1], [43.8, 7.1], [44.8, 7.1], [33.6, 6.8]]),
    (Topic::Disability, 105, [[61.0, 9.3], [51.8, 9.6], [51.7, 9.6], [50.0, 9.6], [35.9, 9.2]]),
    (Topic::Education, 103, [[37.9, 9.4], [53.2, 9.6], [48.5, 9.7], [5.9, 4.5], [41.5, 9.5]]),
    (Topic::Budget, 100, [[57.1, 9.7], [80.7, 7.7], [70.5, 8.9], [40.0, 9.6], [63.0, 9.5]]),
    (Topic::Kids, 92, [[69.2, 9.4], [91.9, 5.6], [77.5, 8.5], [56.3, 10.1], [82.8, 7.7]]),
    (Topic::Environment, 73, [[62.0, 11.1], [66.7, 10.8], [62.5, 11.1], [54.5, 11.4], [58.3, 11.3]]),
    (Topic::SocialSecurity, 72, [[64.2, 11.1], [69.3, 10.7], [65.0, 11.0], [57.8, 11.4], [54.5, 11.5]]),
    (Topic::Fathers, 45, [[38.5, 14.2], [37.8, 14.2], [37.8, 14.2], [13.3, 9.9], [26.9, 13.0]]),
    (Topic::Family, 30, [[72.7, 15.9], [55.6, 17.8], [48.0, 17.9], [60.0, 17.5], [33.3, 16.9]]),
    (Topic::Superfund, 19, [[84.6, 16.2], [73.3, 19.9], [73.3, 19.9], [45.5, 22.4], [73.3, 19.9]]),
];

pub const TOP_POSITIVE: [&str; 20] = [
    "option", "counter", "options", "doj", "authority", "program", "increase", "splitting", "idea", "largest",
    "accreditation", "language", "initiatives", "coordinator", "vouchers", "necessary", "targeted", "significant",
    "think", "action",
];

pub const TOP_NEGATIVE: [&str; 20] = [
    "today", "committee", "state", "subject", "clinton", "education", "human", "family", "let", "police", "30", "soon",
    "eop", "radiation", "00", "experiments", "prisoner", "approved", "18", "jose",
];

/// Reviewer agreement on the doubly annotated batch: both D0, A D0 and B D1,
/// A D1 and B D0, both D1.
pub const AGREEMENT_COUNTS: [usize; 4] = [212, 69, 6, 160];

pub const KAPPA: f64 = 0.67;
