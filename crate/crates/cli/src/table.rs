use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

/// `x` with 15 significant digits.
pub fn significant(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..15).contains(&exp) {
        format!("{:.*}", (14 - exp) as usize, x)
    } else {
        format!("{x:.14e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Num(x) => significant(*x),
            other => other.csv(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => Number::from_f64(*x).map(Value::Number).unwrap_or_else(|| Value::String(format!("{x}"))),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(t) => Value::String(t.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, config: &Map<String, Value>) -> String {
        match format {
            Format::Csv => {
                let mut out = self.columns.join(",");
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut top = Map::new();
                top.insert("config".into(), Value::Object(config.clone()));
                top.insert("rows".into(), Value::Array(rows));
                let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json values serialize");
                s.push('\n');
                s
            }
            Format::Table => {
                let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::human).collect()).collect();
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|j| cells.iter().map(|r| r[j].chars().count()).chain([self.columns[j].len()]).max().unwrap())
                    .collect();
                let line = |items: Vec<&str>| -> String {
                    let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
                    padded.join("  ").trim_end().to_string() + "\n"
                };
                let mut out = line(self.columns.clone());
                out.push_str(&line(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
                for r in &cells {
                    out.push_str(&line(r.iter().map(String::as_str).collect()));
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_digits() {
        assert_eq!(significant(1.0), "1.00000000000000");
        assert_eq!(significant(2.0 / 3.0), "0.666666666666667");
        assert_eq!(significant(1.5e20), "1.50000000000000e20");
        assert_eq!(significant(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_uses_scientific_notation() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Num(0.5), Cell::Bool(true)]);
        assert_eq!(t.render(Format::Csv, &Map::new()), "a,b\n5e-1,true\n");
    }
}
