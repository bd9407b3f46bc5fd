//! SVG panels of the sweep: populations and coherence moduli against the
//! jump probability. Theory is drawn as lines and estimates as symbols
//! with error bars, each at its own abscissae.

use std::fmt::Write as _;

use qjump_core::DecayType;

use crate::csvio::Row;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 52.0;
const COLORS: [&str; 3] = ["black", "red", "blue"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    Populations,
    Coherences,
}

impl Panel {
    pub const ALL: [Panel; 2] = [Panel::Populations, Panel::Coherences];

    pub fn file_stem(self) -> &'static str {
        match self {
            Panel::Populations => "populations",
            Panel::Coherences => "coherences",
        }
    }

    fn offset(self) -> usize {
        match self {
            Panel::Populations => 0,
            Panel::Coherences => 3,
        }
    }

    fn labels(self) -> [&'static str; 3] {
        match self {
            Panel::Populations => ["ρ11", "ρ22", "ρ33"],
            Panel::Coherences => ["|σ12|", "|σ13|", "|σ23|"],
        }
    }

    fn y_max(self) -> f64 {
        match self {
            Panel::Populations => 1.0,
            Panel::Coherences => 0.6,
        }
    }
}

/// The decay type whose inactive probability column is zero on every row.
pub fn infer_decay_type(rows: &[Row]) -> Option<DecayType> {
    let zero = |k: usize| rows.iter().all(|r| r.probs[k] == 0.0);
    match (zero(0), zero(1), zero(2)) {
        (false, true, false) => Some(DecayType::Cascade),
        (true, false, false) => Some(DecayType::Lambda),
        (false, false, true) => Some(DecayType::V),
        _ => None,
    }
}

pub fn abscissa(t: DecayType, probs: [f64; 3]) -> f64 {
    match t {
        DecayType::Cascade => probs[0],
        DecayType::Lambda => probs[1] + probs[2],
        DecayType::V => probs[1],
    }
}

fn x_label(t: DecayType) -> &'static str {
    match t {
        DecayType::Cascade => "p21 = p32",
        DecayType::Lambda => "p31 + p32",
        DecayType::V => "p31",
    }
}

struct Frame {
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        LEFT + v * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - v / self.y_max * (HEIGHT - TOP - BOTTOM)
    }
}

pub fn render(t: DecayType, panel: Panel, theory: &[Row], estimates: &[Row]) -> String {
    let f = Frame { y_max: panel.y_max() };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle">{} decay: {}</text>"#,
        WIDTH / 2.0,
        t.name(),
        panel.file_stem()
    );
    axes(&mut s, &f, t);

    for (q, color) in COLORS.iter().enumerate() {
        let col = panel.offset() + q;
        let mut pts: Vec<(f64, f64)> = theory.iter().map(|r| (abscissa(t, r.probs), r.values[col])).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for run in pts.split(|p| !p.1.is_finite()).filter(|r| !r.is_empty()) {
            let coords: Vec<String> = run.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.x(x), f.y(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                coords.join(" ")
            );
        }
        for r in estimates {
            let (x, y) = (abscissa(t, r.probs), r.values[col]);
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let err = r.errors.map_or(0.0, |e| e[col]);
            if err.is_finite() && err > 0.0 {
                let (xp, lo, hi) = (f.x(x), f.y(y - err), f.y(y + err));
                let _ = writeln!(
                    s,
                    r#"<path d="M{xp:.2},{lo:.2}V{hi:.2}M{:.2},{lo:.2}H{:.2}M{:.2},{hi:.2}H{:.2}" stroke="{color}" stroke-width="1"/>"#,
                    xp - 3.0,
                    xp + 3.0,
                    xp - 3.0,
                    xp + 3.0
                );
            }
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
                f.x(x),
                f.y(y)
            );
        }
        let ly = TOP + 14.0 + 16.0 * q as f64;
        let lx = WIDTH - RIGHT - 70.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            panel.labels()[q]
        );
    }
    s.push_str("</svg>\n");
    s
}

fn axes(s: &mut String, f: &Frame, t: DecayType) {
    let (x0, x1, y0, y1) = (f.x(0.0), f.x(1.0), f.y(0.0), f.y(f.y_max));
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let x = f.x(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.2}</text>"#,
            y0 + 5.0,
            y0 + 18.0
        );
    }
    let steps = (f.y_max / 0.2).round() as usize;
    for k in 0..=steps {
        let v = k as f64 * 0.2;
        let y = f.y(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        x_label(t)
    );
}
