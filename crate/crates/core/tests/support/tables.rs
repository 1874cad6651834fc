//! Row-wise transcription of the three results tables: which experiments mark
//! each feature, then the per-experiment parameters.

/// Each feature row of the tables with the experiments that mark it.
pub const MARKS: [(&str, &[u32]); 19] = [
    ("open_BTCUSDT", &[4, 5, 6, 12, 13, 14, 15, 17]),
    ("high_BTCUSDT", &[4, 5, 6, 12, 13, 14, 15, 17]),
    ("low_BTCUSDT", &[4, 5, 6, 12, 13, 14, 15, 17]),
    ("close_BTCUSDT", &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17]),
    ("volume_BTCUSDT", &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17]),
    ("close_LTCUSD", &[1, 2, 3, 4, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17]),
    ("volume_LTCUSD", &[1, 2, 3, 4, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17]),
    ("close_ETHUSD", &[1, 2, 3, 4, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17]),
    ("volume_ETHUSD", &[1, 2, 3, 4, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17]),
    ("gnews_flair", &[1, 2, 3, 4, 7, 9, 12, 13, 14, 15, 16, 17]),
    ("gnews_tb_polarity", &[1, 2, 3, 4, 7, 10, 12, 13, 14, 15, 17]),
    ("gnews_tb_subjectivity", &[1, 2, 3, 4, 7, 10, 12, 13, 14, 15, 17]),
    ("gnews_sid_pos", &[1, 2, 3, 4, 7, 11, 12, 13, 14, 15, 17]),
    ("gnews_sid_neg", &[1, 2, 3, 4, 7, 11, 12, 13, 14, 15, 17]),
    ("reddit_flair", &[1, 2, 3, 4, 8, 9, 12, 13, 14, 15, 16, 17]),
    ("reddit_tb_polarity", &[1, 2, 3, 4, 8, 10, 12, 13, 14, 15, 17]),
    ("reddit_tb_subjectivity", &[1, 2, 3, 4, 8, 10, 12, 13, 14, 15, 17]),
    ("reddit_sid_pos", &[1, 2, 3, 4, 8, 11, 12, 13, 14, 15, 17]),
    ("reddit_sid_neg", &[1, 2, 3, 4, 8, 11, 12, 13, 14, 15, 17]),
];

pub const LOOKBACK: [usize; 17] = [60, 60, 120, 120, 60, 60, 60, 60, 60, 60, 60, 120, 60, 60, 60, 60, 60];
pub const UNITS: [usize; 17] = [32, 64, 64, 64, 32, 32, 32, 32, 32, 32, 32, 64, 32, 32, 32, 32, 32];
pub const NOTES: [&[u8]; 17] = [
    &[1, 2],
    &[1, 2],
    &[1, 2],
    &[1, 2],
    &[2],
    &[2],
    &[2],
    &[2],
    &[1, 2],
    &[1, 2],
    &[1, 2],
    &[1, 3],
    &[1, 4],
    &[1, 5],
    &[1, 6],
    &[1, 7],
    &[1, 8],
];
pub const TEST_RMSE: [f64; 17] = [
    2490.4, 2632.1, 3541.8, 434.87, 173.72, 556.5, 2406.1, 1943.3, 1746.0, 2282.4, 789.86, 1514.8, 983.94, 1314.9,
    1177.0, 2146.1, 2615.3,
];

/// Every difference between `m` and the transcription, one line each.
pub fn matrix_mismatches(m: &[sentiforge::runner::ExperimentConfig]) -> Vec<String> {
    use std::collections::BTreeSet;
    let mut bad = Vec::new();
    if m.len() != 17 {
        bad.push(format!("{} experiments, want 17", m.len()));
    }
    for (i, cfg) in m.iter().enumerate().take(17) {
        let id = i as u32 + 1;
        let want: BTreeSet<&str> = MARKS.iter().filter(|(_, ids)| ids.contains(&id)).map(|(f, _)| *f).collect();
        let got: BTreeSet<&str> = cfg.features.iter().map(String::as_str).collect();
        let checks = [
            (cfg.id == id, "id"),
            (got == want, "features"),
            (cfg.lookback_days == LOOKBACK[i], "lookback"),
            (cfg.units == UNITS[i], "units"),
            (cfg.notes == NOTES[i], "notes"),
            ((cfg.batch_size, cfg.epochs) == (128, 5), "batch size or epochs"),
            (cfg.sum_sentiment == NOTES[i].contains(&1), "sentiment summation"),
            (cfg.validate().is_ok(), "validation"),
        ];
        bad.extend(checks.iter().filter(|(ok, _)| !ok).map(|(_, what)| format!("experiment {id}: {what}")));
    }
    bad
}
