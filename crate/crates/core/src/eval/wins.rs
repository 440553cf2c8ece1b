use std::collections::BTreeMap;

use super::MetricRow;

/// Per-selector win counts. A win goes to every selector tied for the
/// minimal solve time among rows that reached optimality; instances no
/// selector solved are excluded.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WinTable {
    pub wins: BTreeMap<String, usize>,
    /// Instances with at least one solved row.
    pub counted: usize,
    /// Instances with no solved row.
    pub excluded: usize,
    /// Extra wins handed out by ties (tied selectors minus one, summed).
    pub tie_overcount: usize,
}

impl WinTable {
    pub fn total_wins(&self) -> usize {
        self.wins.values().sum()
    }

    /// `sum(wins) == counted + tie_overcount`.
    pub fn identity_holds(&self) -> bool {
        self.total_wins() == self.counted + self.tie_overcount
    }
}

/// Ties are exact equality of the reported solve times.
pub fn count_wins(rows: &[MetricRow]) -> WinTable {
    let mut table = WinTable::default();
    let mut by_instance: BTreeMap<&str, Vec<&MetricRow>> = BTreeMap::new();
    for r in rows {
        table.wins.entry(r.selector.clone()).or_insert(0);
        by_instance.entry(r.instance_id.as_str()).or_default().push(r);
    }
    for group in by_instance.values() {
        let solved: Vec<&&MetricRow> = group.iter().filter(|r| r.status == "optimal").collect();
        let Some(best) = solved.iter().map(|r| r.solve_time).reduce(f64::min) else {
            table.excluded += 1;
            continue;
        };
        table.counted += 1;
        let winners: Vec<&&&MetricRow> = solved.iter().filter(|r| r.solve_time == best).collect();
        table.tie_overcount += winners.len() - 1;
        for w in winners {
            *table.wins.get_mut(&w.selector).expect("selector registered") += 1;
        }
    }
    table
}
