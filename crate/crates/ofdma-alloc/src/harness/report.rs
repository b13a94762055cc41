//! CSV report emission.
//!
//! Four files per run, fixed headers, rows sorted by (K1, power ratio),
//! reals at 9 significant digits. Empty cells mark algorithms that were not
//! selected. With identical seeds the emitted bytes are identical.

use super::{AlgorithmId, ScenarioStats};
use crate::text::sig9;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

const MEAN_COLUMNS: [AlgorithmId; 6] = AlgorithmId::ALL;

fn opt_cell(v: Option<f64>) -> String {
    v.map(sig9).unwrap_or_default()
}

fn sorted(stats: &[ScenarioStats]) -> Vec<&ScenarioStats> {
    let mut rows: Vec<&ScenarioStats> = stats.iter().collect();
    rows.sort_by(|a, b| {
        a.cbr_users
            .cmp(&b.cbr_users)
            .then(a.power_ratio.total_cmp(&b.power_ratio))
    });
    rows
}

fn mean_header() -> String {
    MEAN_COLUMNS
        .iter()
        .map(|a| format!("mean_{}", a.name().replace('-', "_")))
        .collect::<Vec<_>>()
        .join(",")
}

fn mean_cells(s: &ScenarioStats) -> String {
    MEAN_COLUMNS
        .iter()
        .map(|a| opt_cell(s.means.get(a).copied()))
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes `scenario_stats.csv`, `sumrate_vs_load.csv`,
/// `sumrate_vs_power.csv` and `swap_effect.csv` under `out_dir`, returning
/// the paths.
pub fn emit_reports(stats: &[ScenarioStats], out_dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let rows = sorted(stats);
    let mut written = Vec::new();

    let mut scenario = format!(
        "k1,power_ratio,subchannels,drops,converged,{},ratio_heur1_ip_pct,ratio_heur2_ip_pct,ratio_ip_lp_pct,outage_frames\n",
        mean_header()
    );
    for s in &rows {
        let outages: usize = s.outages.values().sum();
        scenario.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            s.cbr_users,
            sig9(s.power_ratio),
            s.subchannels,
            s.drops_executed,
            s.converged,
            mean_cells(s),
            opt_cell(s.ratio_heur1_ip),
            opt_cell(s.ratio_heur2_ip),
            opt_cell(s.ratio_ip_lp),
            outages,
        ));
    }
    let path = out_dir.join("scenario_stats.csv");
    fs::write(&path, scenario)?;
    written.push(path);

    // sum rate against CBR loading, grouped by power ratio
    let mut load = format!("power_ratio,k1,{}\n", mean_header());
    let mut by_power = rows.clone();
    by_power.sort_by(|a, b| {
        a.power_ratio
            .total_cmp(&b.power_ratio)
            .then(a.cbr_users.cmp(&b.cbr_users))
    });
    for s in &by_power {
        load.push_str(&format!(
            "{},{},{}\n",
            sig9(s.power_ratio),
            s.cbr_users,
            mean_cells(s)
        ));
    }
    let path = out_dir.join("sumrate_vs_load.csv");
    fs::write(&path, load)?;
    written.push(path);

    // sum rate against power ratio, grouped by CBR count
    let mut power = format!("k1,power_ratio,{}\n", mean_header());
    for s in &rows {
        power.push_str(&format!(
            "{},{},{}\n",
            s.cbr_users,
            sig9(s.power_ratio),
            mean_cells(s)
        ));
    }
    let path = out_dir.join("sumrate_vs_power.csv");
    fs::write(&path, power)?;
    written.push(path);

    let mut swap = String::from("k1,power_ratio,heur1,heur1_noswap,gain_pct\n");
    for s in &rows {
        swap.push_str(&format!(
            "{},{},{},{},{}\n",
            s.cbr_users,
            sig9(s.power_ratio),
            opt_cell(s.means.get(&AlgorithmId::Heur1).copied()),
            opt_cell(s.means.get(&AlgorithmId::Heur1NoSwap).copied()),
            opt_cell(s.swap_gain_pct),
        ));
    }
    let path = out_dir.join("swap_effect.csv");
    fs::write(&path, swap)?;
    written.push(path);

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn stats(k1: usize, ratio: f64) -> ScenarioStats {
        let mut means = BTreeMap::new();
        means.insert(AlgorithmId::Heur1, 50.0);
        means.insert(AlgorithmId::Heur1NoSwap, 48.0);
        ScenarioStats {
            subchannels: 32,
            cbr_users: k1,
            be_users: 3,
            power_ratio: ratio,
            seed: 1,
            drops_executed: 25,
            frames_total: 100,
            converged: true,
            means,
            variances: BTreeMap::new(),
            ratio_heur1_ip: Some(95.0),
            ratio_heur2_ip: None,
            ratio_ip_lp: None,
            swap_gain_pct: Some(100.0 * 2.0 / 48.0),
            outages: BTreeMap::new(),
            ip_unresolved: 0,
        }
    }

    #[test]
    fn empty_stats_emit_headers_only() {
        let dir = std::env::temp_dir().join(format!("rpt-{}", std::process::id()));
        let files = emit_reports(&[], &dir).unwrap();
        assert_eq!(files.len(), 4);
        for f in &files {
            let text = fs::read_to_string(f).unwrap();
            assert_eq!(text.lines().count(), 1, "{f:?} should be header-only");
        }
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rows_sorted_and_cells_filled() {
        let dir = std::env::temp_dir().join(format!("rpt2-{}", std::process::id()));
        let data = vec![stats(4, 2.0), stats(2, 3.0), stats(2, 2.0)];
        emit_reports(&data, &dir).unwrap();
        let text = fs::read_to_string(dir.join("scenario_stats.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("2,2.00000000e0"));
        assert!(lines[2].starts_with("2,3.00000000e0"));
        assert!(lines[3].starts_with("4,2.00000000e0"));
        // unselected algorithms leave empty cells
        assert!(lines[1].contains(",,"));
        let swap = fs::read_to_string(dir.join("swap_effect.csv")).unwrap();
        assert!(swap.lines().nth(1).unwrap().contains("5.00000000e1"));
        fs::remove_dir_all(&dir).unwrap();
    }
}
