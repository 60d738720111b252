//! Tab-separated study, weight, and outcome files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{PriorStat, StudyRow, TestOutcome};
use crate::error::{Error, Result};
use crate::weights::WeightSolution;

/// Column names accepted in study files (case-insensitive).
pub const ACCEPTED_COLUMNS: [&str; 7] = [
    "id",
    "prior_z",
    "prior_p",
    "prior_sign",
    "n_prior",
    "n_current",
    "p_current",
];

/// Defaults for columns a study file may omit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReadOptions {
    pub n_prior: Option<f64>,
    pub n_current: Option<f64>,
}

fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NA".into()
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na")
}

struct Columns {
    id: usize,
    prior_z: Option<usize>,
    prior_p: Option<usize>,
    prior_sign: Option<usize>,
    n_prior: Option<usize>,
    n_current: Option<usize>,
    p_current: Option<usize>,
    width: usize,
}

impl Columns {
    fn parse(header: &str, err: impl Fn(String) -> Error) -> Result<Self> {
        let names: Vec<String> = header
            .split('\t')
            .map(|s| s.trim().to_ascii_lowercase())
            .collect();
        let mut slots: [Option<usize>; 7] = [None; 7];
        for (pos, name) in names.iter().enumerate() {
            let Some(k) = ACCEPTED_COLUMNS.iter().position(|c| c == name) else {
                return Err(err(format!(
                    "unknown column '{name}'; accepted columns are {}",
                    ACCEPTED_COLUMNS.join(", ")
                )));
            };
            if slots[k].replace(pos).is_some() {
                return Err(err(format!("duplicate column '{name}'")));
            }
        }
        let [id, prior_z, prior_p, prior_sign, n_prior, n_current, p_current] = slots;
        let id = id.ok_or_else(|| err("missing column 'id'".into()))?;
        if prior_z.is_none() && prior_p.is_none() {
            return Err(err("need a 'prior_z' or 'prior_p' column".into()));
        }
        Ok(Columns {
            id,
            prior_z,
            prior_p,
            prior_sign,
            n_prior,
            n_current,
            p_current,
            width: names.len(),
        })
    }
}

fn parse_sign(cell: &str) -> Option<f64> {
    match cell {
        "+" | "+1" | "1" => Some(1.0),
        "-" | "-1" | "\u{2212}" | "\u{2212}1" => Some(-1.0),
        _ => None,
    }
}

/// Reads a study file, validating every row.
///
/// Lines starting with `#` and blank lines are skipped; the first other line
/// is the header. Missing sample-size columns or cells fall back to
/// `opts`.
pub fn read_study(path: impl AsRef<Path>, opts: &ReadOptions) -> Result<Vec<StudyRow>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    let mut cols: Option<Columns> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let perr = |message: String| Error::Parse {
            path: PathBuf::from(path),
            line: lineno,
            message,
        };
        let text = line.trim_end_matches('\r');
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let Some(c) = &cols else {
            cols = Some(Columns::parse(text, perr)?);
            continue;
        };
        let cells: Vec<&str> = text.split('\t').map(str::trim).collect();
        if cells.len() != c.width {
            return Err(perr(format!(
                "expected {} fields, found {}",
                c.width,
                cells.len()
            )));
        }
        let get = |k: Option<usize>| k.map(|k| cells[k]).filter(|s| !is_missing(s));
        let num = |name: &str, s: &str| {
            s.parse::<f64>()
                .map_err(|_| perr(format!("{name}: cannot parse '{s}' as a number")))
        };
        let id = cells[c.id].to_string();
        if id.is_empty() {
            return Err(perr("empty id".into()));
        }
        let prior = match (get(c.prior_z), get(c.prior_p)) {
            (Some(z), None) => PriorStat::Z(num("prior_z", z)?),
            (None, Some(p)) => {
                let sign = match get(c.prior_sign) {
                    Some(s) => Some(
                        parse_sign(s)
                            .ok_or_else(|| perr(format!("prior_sign: expected + or -, got '{s}'")))?,
                    ),
                    None => None,
                };
                PriorStat::P {
                    p: num("prior_p", p)?,
                    sign,
                }
            }
            (Some(_), Some(_)) => {
                return Err(perr(format!("row {id}: both prior_z and prior_p given")));
            }
            (None, None) => return Err(perr(format!("row {id}: no prior statistic"))),
        };
        let size = |name: &str, k: Option<usize>, default: Option<f64>| match get(k) {
            Some(s) => num(name, s),
            None => default.ok_or_else(|| perr(format!("row {id}: {name} missing and no default given"))),
        };
        let row = StudyRow {
            prior,
            n_prior: size("n_prior", c.n_prior, opts.n_prior)?,
            n_current: size("n_current", c.n_current, opts.n_current)?,
            p_current: get(c.p_current).map(|s| num("p_current", s)).transpose()?,
            id,
        };
        row.validate().map_err(|e| match e {
            Error::Validation { id, message } => Error::Validation {
                id,
                message: format!("line {lineno}: {message}"),
            },
            other => other,
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: PathBuf::from(path),
            line: 0,
            message: if cols.is_none() { "no header line" } else { "no data rows" }.into(),
        });
    }
    log::debug!("read {} rows from {}", rows.len(), path.display());
    Ok(rows)
}

/// Writes rows in the format [`read_study`] accepts, with only the columns
/// the rows use.
pub fn write_study(path: impl AsRef<Path>, rows: &[StudyRow]) -> Result<()> {
    let any_z = rows.iter().any(|r| matches!(r.prior, PriorStat::Z(_)));
    let any_p = rows.iter().any(|r| matches!(r.prior, PriorStat::P { .. }));
    let any_current = rows.iter().any(|r| r.p_current.is_some());
    let mut header = vec!["id"];
    if any_z || !any_p {
        header.push("prior_z");
    }
    if any_p {
        header.extend(["prior_p", "prior_sign"]);
    }
    header.extend(["n_prior", "n_current"]);
    if any_current {
        header.push("p_current");
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join("\t"))?;
    for r in rows {
        write!(out, "{}", r.id)?;
        let (z, p, s) = match r.prior {
            PriorStat::Z(z) => (fmt_float(z), String::new(), String::new()),
            PriorStat::P { p, sign } => (
                String::new(),
                fmt_float(p),
                match sign {
                    Some(s) if s > 0.0 => "+".into(),
                    Some(_) => "-".into(),
                    None => String::new(),
                },
            ),
        };
        if any_z || !any_p {
            write!(out, "\t{z}")?;
        }
        if any_p {
            write!(out, "\t{p}\t{s}")?;
        }
        write!(out, "\t{}\t{}", fmt_float(r.n_prior), fmt_float(r.n_current))?;
        if any_current {
            let p = r.p_current.map(fmt_float).unwrap_or_default();
            write!(out, "\t{p}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Run metadata written as the `#` header of weight and outcome files.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeMeta {
    pub q: f64,
    pub q_star: f64,
    pub phi: Option<f64>,
    pub lambda: f64,
    pub scheme: String,
    pub exact: bool,
}

impl OutcomeMeta {
    pub fn from_solution(sol: &WeightSolution, phi: Option<f64>, scheme: impl Into<String>) -> Self {
        OutcomeMeta {
            q: sol.q,
            q_star: sol.q_star,
            phi,
            lambda: sol.lambda,
            scheme: scheme.into(),
            exact: sol.exact,
        }
    }

    fn line(&self) -> String {
        format!(
            "# q={} q_star={} phi={} lambda={} scheme={} exact={}",
            fmt_float(self.q),
            fmt_float(self.q_star),
            self.phi.map(fmt_float).unwrap_or_else(|| "NA".into()),
            fmt_float(self.lambda),
            self.scheme,
            self.exact
        )
    }

    fn parse(line: &str) -> Option<Self> {
        let body = line.strip_prefix('#')?.trim();
        let mut meta = OutcomeMeta {
            q: f64::NAN,
            q_star: f64::NAN,
            phi: None,
            lambda: f64::NAN,
            scheme: String::new(),
            exact: false,
        };
        let float = |v: &str| if v == "NA" { Some(f64::NAN) } else { v.parse().ok() };
        let mut seen = 0;
        for kv in body.split_whitespace() {
            let (k, v) = kv.split_once('=')?;
            match k {
                "q" => meta.q = float(v)?,
                "q_star" => meta.q_star = float(v)?,
                "phi" => meta.phi = Some(float(v)?).filter(|x| !x.is_nan()),
                "lambda" => meta.lambda = float(v)?,
                "scheme" => meta.scheme = v.to_string(),
                "exact" => meta.exact = v.parse().ok()?,
                _ => continue,
            }
            seen += 1;
        }
        (seen == 6).then_some(meta)
    }
}

/// Writes per-id decisions: `id, weight, threshold, rejected, p_value`.
pub fn write_outcomes(
    path: impl AsRef<Path>,
    outcomes: &[TestOutcome],
    meta: &OutcomeMeta,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", meta.line())?;
    writeln!(out, "id\tweight\tthreshold\trejected\tp_value")?;
    for o in outcomes {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            o.id,
            fmt_float(o.weight),
            fmt_float(o.threshold),
            u8::from(o.rejected),
            fmt_float(o.p_value)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a file written by [`write_outcomes`].
pub fn read_outcomes(path: impl AsRef<Path>) -> Result<(OutcomeMeta, Vec<TestOutcome>)> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut meta = None;
    let mut header_seen = false;
    let mut outcomes = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let perr = |message: String| Error::Parse {
            path: PathBuf::from(path),
            line: idx + 1,
            message,
        };
        if line.starts_with('#') {
            if meta.is_none() {
                meta = OutcomeMeta::parse(&line);
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(perr(format!("expected 5 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| perr(format!("bad number '{s}'")));
        outcomes.push(TestOutcome {
            id: f[0].to_string(),
            weight: num(f[1])?,
            threshold: num(f[2])?,
            rejected: match f[3] {
                "1" => true,
                "0" => false,
                s => return Err(perr(format!("rejected must be 0 or 1, got '{s}'"))),
            },
            p_value: num(f[4])?,
        });
    }
    let meta = meta.ok_or_else(|| Error::Parse {
        path: PathBuf::from(path),
        line: 1,
        message: "missing '# q=... q_star=...' metadata line".into(),
    })?;
    Ok((meta, outcomes))
}

/// Writes weights and thresholds per test: `id, weight, threshold`, plus a
/// `tail` column (`lower`, `upper`) when there are two tests per id.
pub fn write_weights(
    path: impl AsRef<Path>,
    ids: &[String],
    solution: &WeightSolution,
    meta: &OutcomeMeta,
) -> Result<()> {
    let per_id = match solution.len() {
        n if n == ids.len() => 1,
        n if n == 2 * ids.len() => 2,
        n => {
            return Err(Error::domain(format!(
                "{n} weights for {} ids",
                ids.len()
            )))
        }
    };
    let thresholds = solution.thresholds();
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", meta.line())?;
    writeln!(out, "# path={}", solution.path.as_str())?;
    if per_id == 1 {
        writeln!(out, "id\tweight\tthreshold")?;
    } else {
        writeln!(out, "id\ttail\tweight\tthreshold")?;
    }
    for (t, (w, thr)) in solution.weights.iter().zip(&thresholds).enumerate() {
        let id = &ids[t / per_id];
        if per_id == 1 {
            writeln!(out, "{id}\t{}\t{}", fmt_float(*w), fmt_float(*thr))?;
        } else {
            let tail = if t % 2 == 0 { "lower" } else { "upper" };
            writeln!(out, "{id}\t{tail}\t{}\t{}", fmt_float(*w), fmt_float(*thr))?;
        }
    }
    out.flush()?;
    Ok(())
}
