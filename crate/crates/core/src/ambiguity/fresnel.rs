use std::f64::consts::PI;

/// Gauss–Kronrod 7/15 abscissae on [−1, 1] (non-negative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss 7-point weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const SERIES_THRESHOLD: f64 = 6.0;

/// (∫cos, ∫sin) of πt²/2 over [a, b] by one GK15 panel, with an error estimate.
fn gk15(a: f64, b: f64) -> ((f64, f64), f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let f = |t: f64| {
        let p = 0.5 * PI * t * t;
        (p.cos(), p.sin())
    };
    let (mut kc, mut ks) = (0.0, 0.0);
    let (mut gc, mut gs) = (0.0, 0.0);
    for (i, (&x, &w)) in XGK.iter().zip(&WGK).enumerate() {
        let pts: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &s in pts {
            let (vc, vs) = f(c + s * h * x);
            kc += w * vc;
            ks += w * vs;
            if i % 2 == 1 {
                gc += WG[i / 2] * vc;
                gs += WG[i / 2] * vs;
            }
        }
    }
    let err = h * ((kc - gc).abs() + (ks - gs).abs());
    ((h * kc, h * ks), err)
}

fn adaptive(a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
    let ((c, s), err) = gk15(a, b);
    if err <= tol || depth == 0 {
        return (c, s);
    }
    let m = 0.5 * (a + b);
    let (c1, s1) = adaptive(a, m, 0.5 * tol, depth - 1);
    let (c2, s2) = adaptive(m, b, 0.5 * tol, depth - 1);
    (c1 + c2, s1 + s2)
}

/// Auxiliary functions f, g of the large-argument expansion.
fn aux_fg(x: f64) -> (f64, f64) {
    let z = PI * x * x;
    let z2 = z * z;
    // f ~ (1/(πx)) Σ (−1)^k (4k−1)!!/z^{2k},  g ~ (1/(π²x³)) Σ (−1)^k (4k+1)!!/z^{2k}
    let (mut f, mut g) = (0.0, 0.0);
    let (mut tf, mut tg) = (1.0, 1.0);
    for k in 0..40 {
        f += tf;
        g += tg;
        let kf = k as f64;
        let nf = -(4.0 * kf + 1.0) * (4.0 * kf + 3.0) / z2;
        let ng = -(4.0 * kf + 3.0) * (4.0 * kf + 5.0) / z2;
        if (tf * nf).abs() >= tf.abs() || (tf * nf).abs() < 1e-17 * f.abs() {
            break;
        }
        tf *= nf;
        tg *= ng;
    }
    (f / (PI * x), g / (PI * PI * x * x * x))
}

/// Fresnel integrals C(x) = ∫₀ˣ cos(πt²/2) dt and S(x) = ∫₀ˣ sin(πt²/2) dt.
/// Adaptive Gauss–Kronrod below |x| = 6, asymptotic expansion above.
pub fn fresnel(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax == 0.0 {
        (0.0, 0.0)
    } else if ax < SERIES_THRESHOLD {
        let panels = (ax * ax).ceil().max(1.0) as usize;
        let w = ax / panels as f64;
        (0..panels).fold((0.0, 0.0), |(c, s), i| {
            let (dc, ds) = adaptive(i as f64 * w, (i + 1) as f64 * w, 1e-14, 20);
            (c + dc, s + ds)
        })
    } else {
        let (f, g) = aux_fg(ax);
        let p = 0.5 * PI * ax * ax;
        let (sp, cp) = p.sin_cos();
        (0.5 + f * sp - g * cp, 0.5 - f * cp - g * sp)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}
