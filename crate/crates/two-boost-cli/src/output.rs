//! Deterministic CSV, JSON, and SVG emission. Floats are always printed
//! with 17 significant digits so identical inputs give identical bytes;
//! all structure is assembled by hand to keep field order fixed.

pub const CHORD_CSV_HEADER: &str =
    "eta,f_value,f_prime,action,maslov_tr,res_boundary,res_energy,res_ode";

#[derive(Debug, Clone)]
pub struct ChordRecord {
    pub eta: f64,
    pub f_value: f64,
    pub f_prime: f64,
    pub action: f64,
    pub maslov_tr: String,
    pub res_boundary: f64,
    pub res_energy: f64,
    pub res_ode: f64,
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            ch if (ch as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", ch as u32)),
            ch => out.push(ch),
        }
    }
    out
}

pub fn chord_csv(records: &[ChordRecord]) -> String {
    let mut out = String::from(CHORD_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            float(r.eta),
            float(r.f_value),
            float(r.f_prime),
            float(r.action),
            r.maslov_tr,
            float(r.res_boundary),
            float(r.res_energy),
            float(r.res_ode),
        ));
    }
    out
}

pub fn chord_json(records: &[ChordRecord]) -> String {
    let mut out = String::from("[\n");
    for (i, r) in records.iter().enumerate() {
        out.push_str("  {");
        out.push_str(&format!("\"eta\": {}, ", float(r.eta)));
        out.push_str(&format!("\"f_value\": {}, ", float(r.f_value)));
        out.push_str(&format!("\"f_prime\": {}, ", float(r.f_prime)));
        out.push_str(&format!("\"action\": {}, ", float(r.action)));
        out.push_str(&format!("\"maslov_tr\": \"{}\", ", escape(&r.maslov_tr)));
        out.push_str(&format!("\"res_boundary\": {}, ", float(r.res_boundary)));
        out.push_str(&format!("\"res_energy\": {}, ", float(r.res_energy)));
        out.push_str(&format!("\"res_ode\": {}", float(r.res_ode)));
        out.push_str(if i + 1 == records.len() { "}\n" } else { "},\n" });
    }
    out.push_str("]\n");
    out
}

/// One key/value pair of a hand-assembled JSON object.
pub enum Field {
    Float(&'static str, f64),
    Int(&'static str, i64),
    Str(&'static str, String),
    Bool(&'static str, bool),
    Raw(&'static str, String),
}

pub fn object(fields: &[Field]) -> String {
    let mut parts = Vec::with_capacity(fields.len());
    for f in fields {
        parts.push(match f {
            Field::Float(k, v) => format!("\"{k}\": {}", float(*v)),
            Field::Int(k, v) => format!("\"{k}\": {v}"),
            Field::Str(k, v) => format!("\"{k}\": \"{}\"", escape(v)),
            Field::Bool(k, v) => format!("\"{k}\": {v}"),
            Field::Raw(k, v) => format!("\"{k}\": {v}"),
        });
    }
    format!("{{{}}}", parts.join(", "))
}

pub fn array(items: Vec<String>) -> String {
    if items.is_empty() {
        return "[]".into();
    }
    format!("[\n  {}\n]", items.join(",\n  "))
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];

fn coord(x: f64) -> String {
    format!("{x:.6}")
}

/// Plane projection of a chord family: fixed palette, endpoint markers,
/// legend, viewBox fitted to the data with a 10% margin. The y axis is
/// negated so the plane renders with y pointing up.
pub fn chord_svg(curves: &[Curve], markers: &[(f64, f64)]) -> String {
    let mut min = (f64::INFINITY, f64::INFINITY);
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |x: f64, y: f64| {
        min.0 = min.0.min(x);
        min.1 = min.1.min(-y);
        max.0 = max.0.max(x);
        max.1 = max.1.max(-y);
    };
    for curve in curves {
        for &(x, y) in &curve.points {
            grow(x, y);
        }
    }
    for &(x, y) in markers {
        grow(x, y);
    }
    if !min.0.is_finite() {
        min = (-1.0, -1.0);
        max = (1.0, 1.0);
    }
    let width = (max.0 - min.0).max(1e-9);
    let height = (max.1 - min.1).max(1e-9);
    let pad = 0.1 * width.max(height);
    let (x0, y0) = (min.0 - pad, min.1 - pad);
    let (w, h) = (width + 2.0 * pad, height + 2.0 * pad);
    let stroke = 0.006 * w.max(h);
    let marker_r = 0.012 * w.max(h);
    let font = 0.035 * w.max(h);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"640\" height=\"{}\">\n",
        coord(x0),
        coord(y0),
        coord(w),
        coord(h),
        format!("{:.0}", 640.0 * h / w),
    ));
    svg.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        coord(x0),
        coord(y0),
        coord(w),
        coord(h)
    ));
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> =
            curve.points.iter().map(|&(x, y)| format!("{},{}", coord(x), coord(-y))).collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{}\" points=\"{}\"/>\n",
            coord(stroke),
            pts.join(" ")
        ));
    }
    for &(x, y) in markers {
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#000000\"/>\n",
            coord(x),
            coord(-y),
            coord(marker_r)
        ));
    }
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = y0 + font * 1.4 * (i as f64 + 1.0);
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"{}\" fill=\"{color}\">{}</text>\n",
            coord(x0 + font * 0.6),
            coord(y),
            coord(font),
            curve.label
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
