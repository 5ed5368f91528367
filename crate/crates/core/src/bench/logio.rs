//! CSV formats for run logs, diagnostics and ECDF curves.
//!
//! Every file starts with `#` metadata lines (a key line, then a value
//! line), followed by a column-name line and the data rows. Reals are
//! written with Rust's shortest round-trip formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::diagnostics::DiagnosticsRow;
use crate::bench::ecdf::EcdfCurve;
use crate::bench::table::CurveKey;
use crate::de::{RunLog, RunMeta};
use crate::error::{Error, Result};

pub const RUN_META_KEYS: &str = "function,n,instance,strategy,pcm,repair,mu,seed,budget";
pub const RUN_COLUMNS: &str = "eval,f_delta";
pub const DIAG_COLUMNS: &str = "t,evals,div,nsame,mean_succ_s,mean_succ_c,pcm_snapshot...";
pub const CURVE_META_KEYS: &str = "strategy,pcm,repair,n,runs";
pub const ECDF_COLUMNS: &str = "eval_grid_point,proportion";

fn real(v: f64) -> String {
    format!("{v:?}")
}

fn meta_header(meta: &RunMeta) -> String {
    format!(
        "# {RUN_META_KEYS}\n# {},{},{},{},{},{},{},{},{}\n",
        meta.function, meta.n, meta.instance, meta.strategy, meta.pcm, meta.repair, meta.mu, meta.seed, meta.budget
    )
}

pub fn format_run_log(log: &RunLog) -> String {
    let mut out = meta_header(&log.meta);
    out.push_str(RUN_COLUMNS);
    out.push('\n');
    for &(e, d) in &log.trace {
        let _ = writeln!(out, "{e},{}", real(d));
    }
    out
}

pub fn format_diagnostics(meta: &RunMeta, rows: &[DiagnosticsRow]) -> String {
    let mut out = meta_header(meta);
    out.push_str(DIAG_COLUMNS);
    out.push('\n');
    for r in rows {
        let (s, c) = match r.mean_success {
            Some((s, c)) => (real(s), real(c)),
            None => (String::new(), String::new()),
        };
        let _ = write!(out, "{},{},{},{},{s},{c}", r.t, r.evals, real(r.div), r.nsame);
        for v in &r.snapshot {
            let _ = write!(out, ",{}", real(*v));
        }
        out.push('\n');
    }
    out
}

pub fn format_ecdf(curve: &EcdfCurve, key: Option<&CurveKey>, runs: usize) -> String {
    let mut out = String::new();
    if let Some(k) = key {
        let _ = writeln!(out, "# {CURVE_META_KEYS}\n# {},{},{},{},{runs}", k.strategy, k.pcm, k.repair, k.n);
    }
    out.push_str(ECDF_COLUMNS);
    out.push('\n');
    for (e, p) in curve.grid.iter().zip(&curve.proportion) {
        let _ = writeln!(out, "{},{}", real(*e), real(*p));
    }
    out
}

/// Write through a temporary sibling so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Lines<'a> {
    path: &'a Path,
    meta: Vec<Vec<&'a str>>,
    rows: Vec<(usize, Vec<&'a str>)>,
}

impl<'a> Lines<'a> {
    fn split(path: &'a Path, text: &'a str, columns: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut rows = Vec::new();
        let mut seen_columns = false;
        for (k, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if let Some(rest) = line.strip_prefix('#') {
                meta.push(rest.trim().split(',').collect());
            } else if line.is_empty() {
                continue;
            } else if !seen_columns && line == columns {
                seen_columns = true;
            } else {
                rows.push((k + 1, line.split(',').collect()));
            }
        }
        Ok(Self { path, meta, rows })
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { path: self.path.to_path_buf(), line, msg: msg.into() }
    }

    /// Values of the metadata block whose key line is `keys`.
    fn meta_values(&self, keys: &str) -> Result<Option<&[&'a str]>> {
        let keys: Vec<&str> = keys.split(',').collect();
        match self.meta.iter().position(|m| *m == keys) {
            None => Ok(None),
            Some(k) => match self.meta.get(k + 1) {
                Some(v) if v.len() == keys.len() => Ok(Some(v)),
                _ => Err(self.err(k + 2, "metadata values do not match the key line")),
            },
        }
    }
}

fn field<T: std::str::FromStr>(lines: &Lines<'_>, line: usize, raw: &str, what: &str) -> Result<T> {
    raw.parse().map_err(|_| lines.err(line, format!("bad {what} '{raw}'")))
}

fn parse_meta(lines: &Lines<'_>) -> Result<RunMeta> {
    let v = lines.meta_values(RUN_META_KEYS)?.ok_or_else(|| lines.err(1, "missing run metadata"))?;
    let id = |raw: &str, what: &str| lines.err(2, format!("bad {what} '{raw}'"));
    Ok(RunMeta {
        function: v[0].parse().map_err(|_| id(v[0], "function"))?,
        n: field(lines, 2, v[1], "dimension")?,
        instance: field(lines, 2, v[2], "instance")?,
        strategy: v[3].parse().map_err(|_| id(v[3], "strategy"))?,
        pcm: v[4].parse().map_err(|_| id(v[4], "pcm"))?,
        repair: v[5].parse().map_err(|_| id(v[5], "repair"))?,
        mu: field(lines, 2, v[6], "mu")?,
        seed: field(lines, 2, v[7], "seed")?,
        budget: field(lines, 2, v[8], "budget")?,
    })
}

pub fn parse_run_log(path: &Path, text: &str) -> Result<RunLog> {
    let lines = Lines::split(path, text, RUN_COLUMNS)?;
    let meta = parse_meta(&lines)?;
    let mut trace = Vec::with_capacity(lines.rows.len());
    for (line, cells) in &lines.rows {
        if cells.len() != 2 {
            return Err(lines.err(*line, "expected eval,f_delta"));
        }
        let e: u64 = field(&lines, *line, cells[0], "evaluation index")?;
        let d: f64 = field(&lines, *line, cells[1], "f_delta")?;
        if let Some(&(pe, pd)) = trace.last() {
            if e <= pe || d > pd {
                return Err(lines.err(*line, "trace must improve strictly in evaluation order"));
            }
        }
        trace.push((e, d));
    }
    let evaluations = trace.last().map(|t| t.0).unwrap_or(0);
    Ok(RunLog { meta, trace, evaluations })
}

pub fn read_run_log(path: &Path) -> Result<RunLog> {
    parse_run_log(path, &fs::read_to_string(path)?)
}

pub fn parse_diagnostics(path: &Path, text: &str) -> Result<(RunMeta, Vec<DiagnosticsRow>)> {
    let lines = Lines::split(path, text, DIAG_COLUMNS)?;
    let meta = parse_meta(&lines)?;
    let mut rows = Vec::with_capacity(lines.rows.len());
    for (line, cells) in &lines.rows {
        let line = *line;
        if cells.len() < 6 {
            return Err(lines.err(line, "expected at least six columns"));
        }
        let mean_success = match (cells[4], cells[5]) {
            ("", "") => None,
            (s, c) => Some((field(&lines, line, s, "mean_succ_s")?, field(&lines, line, c, "mean_succ_c")?)),
        };
        let snapshot =
            cells[6..].iter().map(|v| field(&lines, line, v, "snapshot value")).collect::<Result<Vec<f64>>>()?;
        rows.push(DiagnosticsRow {
            t: field(&lines, line, cells[0], "t")?,
            evals: field(&lines, line, cells[1], "evals")?,
            div: field(&lines, line, cells[2], "div")?,
            nsame: field(&lines, line, cells[3], "nsame")?,
            mean_success,
            snapshot,
        });
    }
    Ok((meta, rows))
}

pub fn read_diagnostics(path: &Path) -> Result<(RunMeta, Vec<DiagnosticsRow>)> {
    parse_diagnostics(path, &fs::read_to_string(path)?)
}

pub fn parse_ecdf(path: &Path, text: &str) -> Result<(Option<CurveKey>, EcdfCurve)> {
    let lines = Lines::split(path, text, ECDF_COLUMNS)?;
    let mut key = None;
    let mut denominator = 0;
    if let Some(v) = lines.meta_values(CURVE_META_KEYS)? {
        let bad = |what: &str, raw: &str| lines.err(2, format!("bad {what} '{raw}'"));
        let runs: usize = field(&lines, 2, v[4], "runs")?;
        denominator = runs * crate::bench::ecdf::TARGET_COUNT;
        key = Some(CurveKey {
            strategy: v[0].parse().map_err(|_| bad("strategy", v[0]))?,
            pcm: v[1].parse().map_err(|_| bad("pcm", v[1]))?,
            repair: v[2].parse().map_err(|_| bad("repair", v[2]))?,
            n: field(&lines, 2, v[3], "dimension")?,
        });
    }
    let mut grid = Vec::with_capacity(lines.rows.len());
    let mut proportion = Vec::with_capacity(lines.rows.len());
    for (line, cells) in &lines.rows {
        if cells.len() != 2 {
            return Err(lines.err(*line, "expected eval_grid_point,proportion"));
        }
        grid.push(field(&lines, *line, cells[0], "grid point")?);
        proportion.push(field(&lines, *line, cells[1], "proportion")?);
    }
    Ok((key, EcdfCurve { grid, proportion, denominator }))
}

pub fn read_ecdf(path: &Path) -> Result<(Option<CurveKey>, EcdfCurve)> {
    parse_ecdf(path, &fs::read_to_string(path)?)
}

/// Run logs in `dir` (files ending in `.csv` that are not diagnostics),
/// sorted by file name.
pub fn read_run_logs(dir: &Path) -> Result<Vec<RunLog>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".csv") && !name.ends_with(".diag.csv")
        })
        .collect();
    paths.sort();
    paths.iter().map(|p| read_run_log(p)).collect()
}
