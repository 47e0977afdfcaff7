//! Deterministic table emission: CSV with `#`-prefixed metadata lines, or a
//! JSON object with `meta` and `rows`.

use primelab::Real;

#[derive(Debug, Clone)]
pub enum Value {
    UInt(u64),
    Real(Real),
    Text(String),
}

impl Value {
    fn csv_cell(&self) -> String {
        match self {
            Value::UInt(v) => v.to_string(),
            // f64 Display is the shortest representation that parses back
            // to the same value
            Value::Real(v) => v.to_string(),
            Value::Text(v) => v.clone(),
        }
    }

    fn json_value(&self) -> serde_json::Value {
        match self {
            Value::UInt(v) => (*v).into(),
            Value::Real(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| serde_json::Value::String(v.to_string())),
            Value::Text(v) => serde_json::Value::String(v.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<Value>) -> &mut Self {
        assert_eq!(cells.len(), self.columns.len(), "row width mismatch");
        self.rows.push(cells);
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let meta: serde_json::Map<String, serde_json::Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.json_value()))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut root = serde_json::Map::new();
        root.insert("meta".into(), serde_json::Value::Object(meta));
        root.insert("rows".into(), serde_json::Value::Array(rows));
        let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(root))
            .expect("tables serialize");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "y"]);
        t.meta("seed", 0);
        t.row(vec![Value::UInt(1), Value::Real(0.5)]);
        t.row(vec![Value::UInt(2), Value::Real(1.0 / 3.0)]);
        let text = t.to_csv();
        let expect = "# seed=0\nx,y\n1,0.5\n2,0.3333333333333333\n";
        assert_eq!(text, expect);
        // every float cell parses back to the identical value
        let cell: f64 = text.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(cell, 1.0 / 3.0);
    }

    #[test]
    fn json_layout_round_trips() {
        let mut t = Table::new(&["v"]);
        t.meta("k", "3");
        t.row(vec![Value::Real(0.1 + 0.2)]);
        let parsed: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(parsed["meta"]["k"], "3");
        assert_eq!(parsed["rows"][0]["v"].as_f64().unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn non_finite_reals_become_strings_in_json() {
        let mut t = Table::new(&["v"]);
        t.row(vec![Value::Real(Real::NAN)]);
        let parsed: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(parsed["rows"][0]["v"], "NaN");
    }
}
