//! Static SVG Venn diagrams for two or three generators.

use std::fmt::Write;

use crate::document::DiagramDocument;
use crate::error::{CliError, CliResult};

/// `%g`-style formatting with six significant digits.
pub fn six_significant(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let exp = if rounded.abs() >= 10f64.powi(exp + 1) {
        exp + 1
    } else {
        exp
    };
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        format!("{}e{e}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Layout {
    width: u32,
    height: u32,
    radius: u32,
    circles: &'static [(u32, u32)],
    /// Where each generator's name goes.
    names: &'static [(u32, u32)],
    /// Cell label anchors, by atom mask.
    cells: &'static [(u32, (u32, u32))],
}

const TWO: Layout = Layout {
    width: 420,
    height: 300,
    radius: 100,
    circles: &[(160, 160), (260, 160)],
    names: &[(100, 45), (320, 45)],
    cells: &[(0b01, (115, 160)), (0b10, (305, 160)), (0b11, (210, 160))],
};

const THREE: Layout = Layout {
    width: 440,
    height: 420,
    radius: 100,
    circles: &[(170, 160), (270, 160), (220, 245)],
    names: &[(85, 50), (355, 50), (220, 372)],
    cells: &[
        (0b001, (130, 125)),
        (0b010, (310, 125)),
        (0b100, (220, 300)),
        (0b011, (220, 105)),
        (0b101, (160, 225)),
        (0b110, (280, 225)),
        (0b111, (220, 185)),
    ],
};

const FILLS: [&str; 3] = ["#1f77b4", "#ff7f0e", "#2ca02c"];

pub fn render_svg(doc: &DiagramDocument) -> CliResult<String> {
    let n = doc.metadata.generators.len();
    let layout = match n {
        2 => &TWO,
        3 => &THREE,
        _ => {
            return Err(CliError::Input(format!(
                "rendering supports n=2,3 only (document has n={n})"
            )))
        }
    };
    if doc.atoms.len() != (1 << n) - 1 {
        return Err(CliError::Input(format!(
            "document lists {} atoms; n={n} needs {}",
            doc.atoms.len(),
            (1 << n) - 1
        )));
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
        w = layout.width,
        h = layout.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, &(cx, cy)) in layout.circles.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<circle cx="{cx}" cy="{cy}" r="{}" fill="{}" fill-opacity="0.18" stroke="{}" stroke-width="2"/>"#,
            layout.radius, FILLS[k], FILLS[k]
        );
    }
    for (k, &(x, y)) in layout.names.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y}" text-anchor="middle" font-size="16" font-weight="bold" fill="{}">{}</text>"#,
            FILLS[k],
            escape(&doc.metadata.generators[k])
        );
    }
    for &(cell, (x, y)) in layout.cells {
        let atom = doc
            .atoms
            .iter()
            .find(|a| a.subset.iter().fold(0u32, |m, &i| m | 1 << (i - 1)) == cell)
            .ok_or_else(|| CliError::Input(format!("document has no atom for cell {cell:b}")))?;
        let name: String = atom.subset.iter().map(usize::to_string).collect::<Vec<_>>().join("");
        let _ = writeln!(
            svg,
            r#"<g class="cell" data-subset="{}"><text x="{x}" y="{}" text-anchor="middle" font-size="12">p<tspan baseline-shift="sub" font-size="9">{name}</tspan></text><text x="{x}" y="{}" text-anchor="middle" font-size="12">{}</text></g>"#,
            name,
            y - 4,
            y + 12,
            six_significant(atom.eta)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
