//! File formats.
//!
//! CSV files are comma separated with a header row and `\n` line endings. Every value
//! is written with 17 significant digits so a file re-parses to the same bits. Each
//! data file `name.csv` may carry a JSON sidecar `name.csv.json` with metadata.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exponents::{derive_exponents, SimilarityExponents};
use crate::fields::{FieldGrid, FieldSource};
use crate::phase_plane::Termination;
use crate::profile::{FrontKind, Profile};
use crate::scan::SweepEntry;

/// `{:.16e}`: 17 significant digits, enough to round-trip any finite `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{s:?} is not a number: {e}")))
}

pub fn sidecar_path(data: &Path) -> PathBuf {
    let mut name = data.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Writes a numeric table.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Grid(format!("row of {} values for {} columns", row.len(), header.len())));
        }
        out.write_record(row.iter().map(|v| format_f64(*v)))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_table<R: Read>(r: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(rec.iter().map(parse_f64).collect::<Result<Vec<_>>>()?);
    }
    Ok(Table { header, rows })
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    read_table(File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
    ))
}

/// JSON value of a float; integral values are written as integers (`1`, not `1.0`).
pub fn json_number(v: f64) -> Value {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.007_199_254_740_992e15 {
        Value::from(v as i64)
    } else {
        serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
    }
}

/// Rewrites every float in `value` with [`json_number`].
pub fn integral_floats_as_integers(value: Value) -> Value {
    match value {
        Value::Number(n) => n.as_f64().filter(|_| n.is_f64()).map_or(Value::Number(n), json_number),
        Value::Array(a) => Value::Array(a.into_iter().map(integral_floats_as_integers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, integral_floats_as_integers(v))).collect()),
        other => other,
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(to_json_string(value)?.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub omega: f64,
    pub eta0: Option<f64>,
    pub y_front: Option<f64>,
    pub amplitude: Option<f64>,
    pub front_kind: Option<FrontKind>,
    pub termination: Option<Termination>,
    pub closed_form: bool,
}

impl ProfileMeta {
    pub fn of(profile: &Profile) -> Self {
        Self {
            omega: profile.omega,
            eta0: profile.shock.map(|s| s.eta0),
            y_front: profile.shock.map(|s| s.y_front),
            amplitude: profile.shock.map(|s| s.amplitude),
            front_kind: profile.shock.map(|s| s.kind),
            termination: profile.termination,
            closed_form: profile.is_closed_form(),
        }
    }
}

pub fn write_profile_csv<W: Write>(w: W, profile: &Profile) -> Result<()> {
    let rows = (0..profile.eta_grid.len())
        .map(|k| vec![profile.eta_grid[k], profile.f_values[k], profile.g_values[k]]);
    write_table(w, &["eta", "f", "g"], rows)
}

/// `eta,f,g` CSV plus its sidecar.
pub fn save_profile(path: &Path, profile: &Profile) -> Result<()> {
    let mut w = create(path)?;
    write_profile_csv(&mut w, profile)?;
    w.flush()?;
    write_json(&sidecar_path(path), &ProfileMeta::of(profile))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub eta0: Option<f64>,
    pub source: FieldSource,
    pub n_r: usize,
    pub n_t: usize,
}

impl FieldMeta {
    pub fn of(grid: &FieldGrid) -> Self {
        let e = grid.exponents;
        Self {
            omega: e.omega,
            alpha: e.alpha,
            beta: e.beta,
            delta: e.delta,
            epsilon: e.epsilon,
            eta0: grid.eta0,
            source: grid.source,
            n_r: grid.r_values.len(),
            n_t: grid.t_values.len(),
        }
    }

    pub fn exponents(&self) -> SimilarityExponents {
        SimilarityExponents {
            omega: self.omega,
            alpha: self.alpha,
            beta: self.beta,
            delta: self.delta,
            epsilon: self.epsilon,
        }
    }
}

/// `r,t,T,q` rows, `t` in the outer loop.
pub fn write_fields_csv<W: Write>(w: W, grid: &FieldGrid) -> Result<()> {
    let (nt, nr) = grid.shape();
    let rows = (0..nt).flat_map(move |j| {
        (0..nr).map(move |i| {
            vec![grid.r_values[i], grid.t_values[j], grid.temperature[[j, i]], grid.flux[[j, i]]]
        })
    });
    write_table(w, &["r", "t", "T", "q"], rows)
}

pub fn save_fields(path: &Path, grid: &FieldGrid) -> Result<()> {
    let mut w = create(path)?;
    write_fields_csv(&mut w, grid)?;
    w.flush()?;
    write_json(&sidecar_path(path), &FieldMeta::of(grid))
}

/// Rebuilds a grid from `r,t,T,q` rows. `meta` supplies the exponents and front; without
/// it `omega` must be given and no front is assumed.
pub fn fields_from_table(table: &Table, meta: Option<&FieldMeta>, omega: Option<f64>) -> Result<FieldGrid> {
    let r = table.column("r")?;
    let t = table.column("t")?;
    let temp = table.column("T")?;
    let flux = table.column("q")?;
    let nr = r.iter().skip(1).position(|v| *v == r[0]).map_or(r.len(), |p| p + 1);
    if nr == 0 || r.len() % nr != 0 {
        return Err(Error::Grid("rows do not form a full r × t grid".into()));
    }
    let nt = r.len() / nr;
    let r_values = r[..nr].to_vec();
    let t_values: Vec<f64> = (0..nt).map(|j| t[j * nr]).collect();
    for j in 0..nt {
        for i in 0..nr {
            let k = j * nr + i;
            if r[k] != r_values[i] || t[k] != t_values[j] {
                return Err(Error::Grid(format!("row {} breaks the t-outer, r-inner layout", k + 2)));
            }
        }
    }
    let exponents = match (meta, omega) {
        (_, Some(w)) => derive_exponents(w)?,
        (Some(m), None) => m.exponents(),
        (None, None) => {
            return Err(Error::Precondition("fields file has no sidecar; omega must be given".into()))
        }
    };
    let grid = FieldGrid {
        r_values,
        t_values,
        temperature: Array2::from_shape_vec((nt, nr), temp).map_err(|e| Error::Grid(e.to_string()))?,
        flux: Array2::from_shape_vec((nt, nr), flux).map_err(|e| Error::Grid(e.to_string()))?,
        exponents,
        eta0: meta.and_then(|m| m.eta0),
        source: meta.map_or(FieldSource::NumericProfile, |m| m.source),
    };
    grid.validate()?;
    Ok(grid)
}

/// Reads a fields CSV and, when present, its sidecar.
pub fn load_fields(path: &Path, omega: Option<f64>) -> Result<FieldGrid> {
    let table = read_table_file(path)?;
    let side = sidecar_path(path);
    let meta: Option<FieldMeta> = if side.exists() { Some(read_json(&side)?) } else { None };
    fields_from_table(&table, meta.as_ref(), omega)
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

/// `omega,kind,eta0,amplitude,termination`; failed entries carry kind `Error`.
pub fn write_sweep_csv<W: Write>(w: W, entries: &[SweepEntry]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["omega", "kind", "eta0", "amplitude", "termination"])?;
    for e in entries {
        let (kind, eta0, amp, term) = match &e.result {
            Some(r) => (
                r.kind.as_str().to_string(),
                opt(r.front.map(|f| f.eta0)),
                opt(r.front.map(|f| f.amplitude)),
                r.diagnostics.termination.as_str().to_string(),
            ),
            None => ("Error".to_string(), String::new(), String::new(), String::new()),
        };
        out.write_record([format_f64(e.omega), kind, eta0, amp, term])?;
    }
    out.flush()?;
    Ok(())
}

/// Gnuplot script drawing the `T(r, t)` surface of a fields CSV.
pub fn gnuplot_surface_script(data_file: &str, n_r: usize, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel 'r'\n\
         set ylabel 't'\n\
         set zlabel 'T'\n\
         set hidden3d\n\
         set dgrid3d {n_r},{n_r}\n\
         splot '{data_file}' using 1:2:3 with lines notitle\n\
         pause mouse close\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{linspace, omega_half_field_grid};

    #[test]
    fn float_text_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0, 8.0] {
            assert_eq!(parse_f64(&format_f64(v)).unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn integral_floats_print_as_integers() {
        let v = integral_floats_as_integers(serde_json::json!({"a": 1.0, "b": 0.5, "c": [2.0, -9.0]}));
        assert_eq!(v.to_string(), r#"{"a":1,"b":0.5,"c":[2,-9]}"#);
    }

    #[test]
    fn fields_round_trip_through_text() {
        let axis = linspace(0.5, 2.0, 7);
        let grid = omega_half_field_grid(&axis, &linspace(0.5, 2.0, 5)).unwrap();
        let mut buf = Vec::new();
        write_fields_csv(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("r,t,T,q\n") && !text.contains('\r'));
        let table = read_table(buf.as_slice()).unwrap();
        let back = fields_from_table(&table, Some(&FieldMeta::of(&grid)), None).unwrap();
        assert_eq!(back, grid);
    }

    #[test]
    fn fields_without_metadata_need_omega() {
        let axis = linspace(0.5, 2.0, 5);
        let grid = omega_half_field_grid(&axis, &axis).unwrap();
        let mut buf = Vec::new();
        write_fields_csv(&mut buf, &grid).unwrap();
        let table = read_table(buf.as_slice()).unwrap();
        assert!(matches!(fields_from_table(&table, None, None), Err(Error::Precondition(_))));
        assert_eq!(fields_from_table(&table, None, Some(-0.5)).unwrap().exponents, grid.exponents);
    }

    #[test]
    fn ragged_tables_are_rejected() {
        let table = Table {
            header: ["r", "t", "T", "q"].map(String::from).to_vec(),
            rows: vec![vec![1.0, 1.0, 0.0, 0.0], vec![2.0, 1.0, 0.0, 0.0], vec![1.0, 2.0, 0.0, 0.0]],
        };
        assert!(matches!(fields_from_table(&table, None, Some(0.0)), Err(Error::Grid(_))));
    }

    #[test]
    fn sidecar_names_append_json() {
        assert_eq!(sidecar_path(Path::new("out/prof.csv")), PathBuf::from("out/prof.csv.json"));
    }
}
