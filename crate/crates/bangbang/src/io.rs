//! Text file formats: two-column numeric inputs and the tabular output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bangbang_core::bath::SpectralDensity;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

/// Read `(a, b)` pairs, one per line, separated by whitespace or a comma.
/// Blank lines and text after `#` are ignored.
pub fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>, InputError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| InputError::Io { path: name.clone(), source })?;
    parse_pairs(&text, &name)
}

pub fn parse_pairs(text: &str, name: &str) -> Result<Vec<(f64, f64)>, InputError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| InputError::Parse { path: name.to_string(), line: i + 1, message };
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if fields.len() != 2 {
            return Err(err(format!("expected two columns, found {}", fields.len())));
        }
        let a: f64 = fields[0].parse().map_err(|_| err(format!("not a number: {:?}", fields[0])))?;
        let b: f64 = fields[1].parse().map_err(|_| err(format!("not a number: {:?}", fields[1])))?;
        if !a.is_finite() || !b.is_finite() {
            return Err(err("values must be finite".into()));
        }
        out.push((a, b));
    }
    if out.is_empty() {
        return Err(InputError::Parse { path: name.to_string(), line: 0, message: "no data rows".into() });
    }
    Ok(out)
}

/// Tabulated spectral density from `ω [rad/time]  γ [1/time]` rows.
pub fn load_spectral_density(path: &Path) -> Result<SpectralDensity, InputError> {
    let rows = read_pairs(path)?;
    let (grid, values) = rows.into_iter().unzip();
    SpectralDensity::tabulated(grid, values).map_err(|e| InputError::Parse { path: path.display().to_string(), line: 0, message: e.to_string() })
}

/// A column name and its unit (`1` for dimensionless).
#[derive(Debug, Clone, Copy)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

/// Comma-separated table with a `#` metadata block. Numbers use `{:.12e}`,
/// so identical inputs give byte-identical files.
pub struct Table {
    pub scenario: &'static str,
    pub config_toml: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# bangbang {} scenario={}", env!("CARGO_PKG_VERSION"), self.scenario);
        let _ = writeln!(s, "# resolved config:");
        for line in self.config_toml.lines() {
            let _ = writeln!(s, "#   {line}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let units: Vec<String> = self.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect();
        let _ = writeln!(s, "# units: {}", units.join(", "));
        let names: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        let _ = writeln!(s, "{}", names.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.render())
    }
}

/// Parse a table written by [`Table::render`]: column names and rows.
pub fn read_table(text: &str) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let names = lines.next()?.split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect()).collect();
    Some((names, rows))
}
