use crate::image::Image;

/// Osher-Rudin shock filter, `u_t = −sign(Δu)·|∇u|`.
///
/// Upwind (Godunov) gradient magnitudes keep the scheme monotone, so no new
/// extrema appear for `dt ≤ 0.25`. Borders replicate the edge pixels.
pub fn shock_filter(img: &Image, iters: usize, dt: f64) -> Image {
    assert!(dt > 0.0 && dt <= 0.25, "shock filter time step must lie in (0, 0.25], got {dt}");
    let (w, h) = (img.width(), img.height());
    let mut cur = img.clone();
    let mut next = img.clone();
    for _ in 0..iters {
        {
            let u = cur.data();
            let out = next.data_mut();
            let at = |x: usize, y: usize| u[y * w + x];
            for y in 0..h {
                let ym = y.saturating_sub(1);
                let yp = (y + 1).min(h - 1);
                for x in 0..w {
                    let xm = x.saturating_sub(1);
                    let xp = (x + 1).min(w - 1);
                    let c = at(x, y);
                    let lap = at(xm, y) + at(xp, y) + at(x, ym) + at(x, yp) - 4.0 * c;
                    let dxm = c - at(xm, y);
                    let dxp = at(xp, y) - c;
                    let dym = c - at(x, ym);
                    let dyp = at(x, yp) - c;
                    let delta = if lap > 0.0 {
                        // erosion: pull toward smaller neighbours
                        let g2 = dxm.max(0.0).powi(2) + dxp.min(0.0).powi(2) + dym.max(0.0).powi(2) + dyp.min(0.0).powi(2);
                        -g2.sqrt()
                    } else if lap < 0.0 {
                        // dilation: pull toward larger neighbours
                        let g2 = dxm.min(0.0).powi(2) + dxp.max(0.0).powi(2) + dym.min(0.0).powi(2) + dyp.max(0.0).powi(2);
                        g2.sqrt()
                    } else {
                        0.0
                    };
                    out[y * w + x] = c + dt * delta;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}
