use std::fmt::Write as _;

/// `x` rounded to 12 significant digits, printed as short as possible.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-5..1e12).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

/// Which columns an SVG rendering draws; rows sharing a `group` value form one line.
#[derive(Clone, Debug)]
pub struct Plot {
    pub title: String,
    pub x: usize,
    pub y: usize,
    pub group: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Table {
    /// File stem used when the table is written into a directory.
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub plot: Plot,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[(&str, &str)], plot: Plot) -> Self {
        Table {
            name: name.into(),
            columns: columns
                .iter()
                .map(|&(n, u)| Column { name: n.into(), unit: u.into() })
                .collect(),
            rows: Vec::new(),
            plot,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// CSV with a leading `# units:` line, then the header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# units: ");
        let units: Vec<String> = self.columns.iter().map(|c| format!("{}={}", c.name, c.unit)).collect();
        out.push_str(&units.join(", "));
        out.push('\n');
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(1234567.891234567), "1234567.89123");
        assert_eq!(fmt_num(1.5e-9), "1.5e-9");
        assert_eq!(fmt_num(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let plot = Plot { title: "t".into(), x: 0, y: 1, group: None };
        let mut t = Table::new("x", &[("C", "cost"), ("kind", "label")], plot);
        t.push(vec![Cell::Num(0.5), Cell::Text("A".into())]);
        t.push(vec![Cell::Int(3), Cell::Empty]);
        assert_eq!(t.to_csv(), "# units: C=cost, kind=label\nC,kind\n0.5,A\n3,\n");
        assert_eq!(t.column("kind"), Some(1));
    }
}
