#![no_main]

use libfuzzer_sys::fuzz_target;
use nitsche_core::cut::cut_triangle;
use nitsche_core::Point2;

// Nine little-endian f64 values: three vertices, then three level-set values.
fuzz_target!(|data: &[u8]| {
    if data.len() < 72 {
        return;
    }
    let v: Vec<f64> = data[..72].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if v.iter().any(|x| !x.is_finite() || x.abs() > 1e6) {
        return;
    }
    let verts = [Point2::new(v[0], v[1]), Point2::new(v[2], v[3]), Point2::new(v[4], v[5])];
    let area = 0.5 * ((verts[1] - verts[0]).perp(&(verts[2] - verts[0])));
    let longest = (0..3).map(|i| (verts[(i + 1) % 3] - verts[i]).norm()).fold(0.0, f64::max);
    // mesh-like: shape regular, and not tiny relative to its distance from the origin
    let offset = v[..6].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(area > 1e-6 * longest * longest) || offset > 1e3 * longest || v[6..].iter().all(|&p| p == 0.0) {
        return;
    }
    let info = cut_triangle(verts, [v[6], v[7], v[8]]);
    assert!((info.sub_areas[0] + info.sub_areas[1] - area).abs() <= 1e-9 * area);
    assert!((info.kappa[0] + info.kappa[1] - 1.0).abs() <= 1e-9);
});
