//! Hand-written SVG for strategy pies and sphere frames.

use std::f64::consts::PI;
use std::fmt::Write as _;

use cmas_core::sphereviz::{MarkerKind, Projected, Scene};
use cmas_core::strategy::{pie_chart, S1Action, StateOccupancy, Strategy};

const S1_COLORS: [&str; 4] = ["#1f77b4", "#aec7e8", "#d62728", "#ff9896"];
const S2_COLORS: [&str; 2] = ["#2ca02c", "#98df8a"];

fn polar(cx: f64, cy: f64, r: f64, deg: f64) -> (f64, f64) {
    let a = deg * PI / 180.0;
    (cx + r * a.sin(), cy - r * a.cos())
}

fn arc_path(cx: f64, cy: f64, r: f64, start: f64, sweep: f64) -> String {
    let (x0, y0) = polar(cx, cy, r, start);
    let (x1, y1) = polar(cx, cy, r, start + sweep);
    let large = u8::from(sweep > 180.0);
    format!("M {cx:.3} {cy:.3} L {x0:.3} {y0:.3} A {r} {r} 0 {large} 1 {x1:.3} {y1:.3} Z")
}

/// Six pies, four S1 rows then two S2 rows; the outer band shows how often
/// each state occurred when occupancy is given.
pub fn pie_svg(strategy: &Strategy, occupancy: Option<&StateOccupancy>) -> String {
    let circles = pie_chart(strategy, occupancy);
    let (r, gap) = (40.0, 110.0);
    let width = gap * circles.len() as f64 + 20.0;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="190" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<text x="10" y="16" font-size="13">{}</text>"#, escape(&strategy.label)).unwrap();
    for (i, c) in circles.iter().enumerate() {
        let (cx, cy) = (20.0 + gap * i as f64 + gap / 2.0 - 10.0, 85.0);
        let colors: &[&str] = if c.table == "S1" { &S1_COLORS } else { &S2_COLORS };
        for slice in &c.slices {
            let color = colors[slice.action];
            if slice.sweep_deg >= 359.999 {
                writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r}" fill="{color}"/>"#).unwrap();
            } else {
                writeln!(s, r#"<path d="{}" fill="{color}"/>"#, arc_path(cx, cy, r, slice.start_deg, slice.sweep_deg))
                    .unwrap();
            }
        }
        if let (Some(band), Some(share)) = (c.band_deg, c.occupancy) {
            let (x0, y0) = polar(cx, cy, r + 5.0, 0.0);
            if band >= 359.999 {
                writeln!(
                    s,
                    r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="{}" fill="none" stroke="#333" stroke-width="3"/>"##,
                    r + 5.0
                )
                .unwrap();
            } else if band > 0.0 {
                let (x1, y1) = polar(cx, cy, r + 5.0, band);
                writeln!(
                    s,
                    r##"<path d="M {x0:.3} {y0:.3} A {0} {0} 0 {1} 1 {x1:.3} {y1:.3}" fill="none" stroke="#333" stroke-width="3"/>"##,
                    r + 5.0,
                    u8::from(band > 180.0)
                )
                .unwrap();
            }
            writeln!(
                s,
                r#"<text x="{cx:.3}" y="{:.3}" text-anchor="middle">{:.1}%</text>"#,
                cy + r + 34.0,
                100.0 * share
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{cx:.3}" y="{:.3}" text-anchor="middle">{} {}</text>"#,
            cy + r + 20.0,
            c.table,
            c.state
        )
        .unwrap();
    }
    let mut x = 10.0;
    for (a, color) in S1Action::ALL.iter().zip(S1_COLORS) {
        writeln!(
            s,
            r#"<rect x="{x}" y="172" width="10" height="10" fill="{color}"/><text x="{}" y="181">{}</text>"#,
            x + 14.0,
            a.code()
        )
        .unwrap();
        x += 110.0;
    }
    for (label, color) in ["to public", "to private"].iter().zip(S2_COLORS) {
        writeln!(
            s,
            r#"<rect x="{x}" y="172" width="10" height="10" fill="{color}"/><text x="{}" y="181">{label}</text>"#,
            x + 14.0
        )
        .unwrap();
        x += 90.0;
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn gray(fitness: f64) -> String {
    let v = (30.0 + 220.0 * fitness.clamp(0.0, 1.0)).round() as u8;
    format!("#{v:02x}{v:02x}{v:02x}")
}

/// Orthographic view looking down the focus axis; with `rear_view` a second
/// panel shows the far hemisphere.
pub fn sphere_svg(scene: &Scene, elevation_scale: f64, rear_view: bool) -> String {
    let size = 420.0;
    let panels = if rear_view { 2 } else { 1 };
    let scale = 190.0 / (1.0 + elevation_scale.max(0.0));
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{size}" font-family="sans-serif" font-size="11">"#,
        size * panels as f64
    )
    .unwrap();
    for panel in 0..panels {
        let flip = if panel == 0 { 1.0 } else { -1.0 };
        let (ox, oy) = (size * panel as f64 + size / 2.0, size / 2.0);
        let view = |p: &Projected| (ox + flip * p.x * scale, oy - p.y * scale, flip * p.z);
        writeln!(s, r##"<circle cx="{ox}" cy="{oy}" r="{:.1}" fill="#101018"/>"##, scale).unwrap();
        let mut faces: Vec<(f64, &[usize; 3])> = scene
            .faces
            .iter()
            .map(|f| (f.iter().map(|&i| view(&scene.vertices[i].position).2).sum::<f64>() / 3.0, f))
            .filter(|(z, _)| *z >= 0.0)
            .collect();
        faces.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, f) in faces {
            let pts: Vec<String> = f
                .iter()
                .map(|&i| {
                    let (x, y, _) = view(&scene.vertices[i].position);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let fill = gray(scene.face_fitness(f));
            writeln!(s, r#"<polygon points="{}" fill="{fill}" stroke="{fill}" stroke-width="0.5"/>"#, pts.join(" "))
                .unwrap();
        }
        for m in &scene.markers {
            let (x, y, z) = view(&m.position);
            if z < 0.0 {
                continue;
            }
            match m.kind {
                MarkerKind::Dot => writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#202020"/>"##),
                MarkerKind::Triangle => writeln!(
                    s,
                    r##"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="#3050ff"/>"##,
                    x,
                    y - 4.0,
                    x - 3.5,
                    y + 2.5,
                    x + 3.5,
                    y + 2.5
                ),
                MarkerKind::Current => writeln!(
                    s,
                    r##"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="#e02020" stroke="white" stroke-width="1.5"/>"##
                ),
            }
            .unwrap();
        }
        let title = if panel == 0 { "focus hemisphere" } else { "far hemisphere" };
        writeln!(s, r#"<text x="{}" y="16" fill="black">{title}</text>"#, size * panel as f64 + 8.0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
