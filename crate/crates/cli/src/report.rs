//! `report`: merge tables written by the other subcommands into one JSON
//! document, flagging each against its acceptance band.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::output::VERSION;
use crate::CliError;

const SCHEMAS: [(&str, &[&str]); 11] = [
    ("validate", &["quantity", "value"]),
    ("lyapunov", &["n", "N", "gamma_hat", "se_gamma", "a2_hat", "se_a2"]),
    ("deviations", &["event", "n", "epsilon", "fraction", "se"]),
    ("spectrum", &["xi", "re_lambda", "im_lambda", "gap", "radius"]),
    ("equidist", &["n", "sup_deviation"]),
    ("renewal", &["kind", "t", "estimate", "se", "limit", "limit_se", "tail_proxy"]),
    ("fourier", &["k", "re", "im", "abs", "se"]),
    ("decomp", &["t", "f_id", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "se"]),
    (
        "gammalambda",
        &["t", "s", "log_k", "crossings", "good_fraction", "mean_abs", "max_abs", "asymptotic_regime"],
    ),
    ("regularity", &["r", "mass", "ratio"]),
    ("selftest", &["check", "residual", "tolerance", "pass"]),
];

struct Rows {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Rows {
    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).expect("schema checked")
    }

    fn num(&self, row: &[String], name: &str) -> f64 {
        row[self.col(name)].parse().unwrap_or(f64::NAN)
    }

    fn text<'a>(&self, row: &'a [String], name: &str) -> &'a str {
        &row[self.col(name)]
    }

    fn nums(&self, name: &str) -> Vec<f64> {
        self.rows.iter().map(|r| self.num(r, name)).collect()
    }
}

fn read(path: &Path) -> Result<Rows, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let header = rdr
        .headers()
        .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        rows.push(rec.iter().map(String::from).collect());
    }
    Ok(Rows { header, rows })
}

fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn median(xs: &[f64]) -> f64 {
    furstenberg_core::mc::median(xs)
}

fn section(table: &str, r: &Rows) -> (Map<String, Value>, BTreeMap<String, bool>) {
    let mut m = Map::new();
    let mut flags = BTreeMap::new();
    match table {
        "validate" => {
            for row in &r.rows {
                m.insert(r.text(row, "quantity").to_string(), json!(r.text(row, "value")));
            }
        }
        "lyapunov" => {
            if let Some(row) = r.rows.first() {
                let (g, se) = (r.num(row, "gamma_hat"), r.num(row, "se_gamma"));
                m.insert("gamma_hat".into(), json!(g));
                m.insert("se".into(), json!(se));
                flags.insert("gamma_positive".into(), g - 3.0 * se > 0.0);
            }
        }
        "deviations" => {
            m.insert("rows".into(), json!(r.rows.len()));
        }
        "spectrum" => {
            for row in &r.rows {
                if r.num(row, "xi") == 0.0 {
                    let dev = (r.num(row, "re_lambda") - 1.0).hypot(r.num(row, "im_lambda"));
                    m.insert("lambda0_deviation".into(), json!(dev));
                    flags.insert("lambda0_is_one".into(), dev <= 1e-10);
                }
            }
            let radii = r.nums("radius");
            flags.insert("radius_at_most_one".into(), radii.iter().all(|&x| x <= 1.0 + 1e-9));
        }
        "equidist" => {
            let pts: Vec<(f64, f64)> = r
                .rows
                .iter()
                .map(|row| (r.num(row, "n"), r.num(row, "sup_deviation")))
                .filter(|p| p.1 > 0.0)
                .collect();
            if pts.len() >= 2 {
                let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
                let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
                let (_, slope, r2) = furstenberg_core::mc::linear_fit(&xs, &ys);
                m.insert("slope".into(), json!(slope));
                m.insert("r2".into(), json!(r2));
                flags.insert("log_linear_decay".into(), r2 >= 0.9 && slope < 0.0);
            }
        }
        "renewal" => {
            for row in &r.rows {
                let kind = r.text(row, "kind");
                let (est, se) = (r.num(row, "estimate"), r.num(row, "se"));
                let (lim, lse) = (r.num(row, "limit"), r.num(row, "limit_se"));
                if lim.is_finite() {
                    let band = if kind.starts_with("E2") { 0.10 } else { 0.05 };
                    let ok = (est - lim).abs() <= (3.0 * se.hypot(lse)).max(band * lim.abs());
                    flags.insert(format!("{kind}@t={}", r.text(row, "t")), ok);
                }
            }
        }
        "fourier" => {
            let abs = r.nums("abs");
            let se = r.nums("se");
            let k = r.nums("k");
            if let Some(i0) = k.iter().position(|&x| x == 0.0) {
                flags.insert("zero_mode_is_one".into(), (abs[i0] - 1.0).abs() <= 1e-12);
            }
            flags.insert(
                "bounded_by_one".into(),
                abs.iter().zip(&se).all(|(a, s)| *a <= 1.0 + 3.0 * s + 1e-12),
            );
            let pick = |lo: f64, hi: f64| -> Vec<f64> {
                k.iter().zip(&abs).filter(|(k, _)| **k >= lo && **k <= hi).map(|(_, a)| *a).collect()
            };
            let (low, high) = (pick(1.0, 8.0), pick(128.0, 256.0));
            if low.len() == 8 && high.len() == 129 {
                let (ml, mh) = (median(&low), median(&high));
                let mx = high.iter().copied().fold(0.0, f64::max);
                m.insert("median_low".into(), json!(ml));
                m.insert("median_high".into(), json!(mh));
                m.insert("max_high".into(), json!(mx));
                flags.insert("decay_margin".into(), mh < ml - 0.1 && mx <= 0.3);
            }
        }
        "decomp" => {
            for row in &r.rows {
                let gap = (r.num(row, "lhs_re") - r.num(row, "rhs_re")).hypot(r.num(row, "lhs_im") - r.num(row, "rhs_im"));
                let ok = gap <= 3.0 * r.num(row, "se");
                flags.insert(format!("{}@t={}", r.text(row, "f_id"), r.text(row, "t")), ok);
            }
        }
        "gammalambda" => {
            for row in &r.rows {
                flags.insert(format!("good_fraction@s={}", r.text(row, "s")), r.num(row, "good_fraction") >= 0.9);
            }
        }
        "regularity" => {
            let rs = r.nums("r");
            let ratio = r.nums("ratio");
            let range: Vec<(f64, f64)> = rs
                .iter()
                .zip(&ratio)
                .filter(|(r, _)| **r <= (-2.0f64).exp() * (1.0 + 1e-12) && **r >= (-8.0f64).exp() * (1.0 - 1e-12))
                .map(|(a, b)| (*a, *b))
                .collect();
            if let Some(first) = range.iter().find(|p| (p.0.ln() + 2.0).abs() < 1e-9) {
                let mx = range.iter().map(|p| p.1).fold(0.0, f64::max);
                m.insert("max_ratio".into(), json!(mx));
                flags.insert("ratio_bounded".into(), mx <= 2.0 * first.1);
            }
        }
        "selftest" => {
            let all = r.rows.iter().all(|row| r.text(row, "pass") == "true");
            flags.insert("all_identities".into(), all);
        }
        _ => unreachable!("known schema"),
    }
    (m, flags)
}

/// Writes the summary to `out` and returns the number of sections.
pub fn run(paths: &[PathBuf], out: &Path) -> Result<usize, CliError> {
    let mut sections = Vec::new();
    for path in expand(paths)? {
        let rows = read(&path)?;
        let table = SCHEMAS
            .iter()
            .find(|(_, h)| rows.header.iter().map(String::as_str).eq(h.iter().copied()))
            .map(|(name, _)| *name)
            .ok_or_else(|| {
                CliError::Schema(format!(
                    "{}: header [{}] matches no known table",
                    path.display(),
                    rows.header.join(",")
                ))
            })?;
        let (metrics, flags) = section(table, &rows);
        sections.push(json!({
            "table": table,
            "file": path.display().to_string(),
            "rows": rows.rows.len(),
            "metrics": metrics,
            "flags": flags,
        }));
    }
    let n = sections.len();
    let doc = json!({ "version": VERSION, "sections": sections });
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(CliError::io)?;
    bytes.push(b'\n');
    std::fs::write(out, bytes).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    Ok(n)
}
