use super::LabColor;

/// Parametric weighting factors for lightness, chroma and hue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct De2000Params {
    pub kl: f64,
    pub kc: f64,
    pub kh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("CIEDE2000 weighting factors must be strictly positive (kL={kl}, kC={kc}, kH={kh})")]
pub struct InvalidWeights {
    pub kl: f64,
    pub kc: f64,
    pub kh: f64,
}

impl De2000Params {
    pub fn new(kl: f64, kc: f64, kh: f64) -> Result<Self, InvalidWeights> {
        if [kl, kc, kh].iter().all(|k| *k > 0.0 && k.is_finite()) {
            Ok(Self { kl, kc, kh })
        } else {
            Err(InvalidWeights { kl, kc, kh })
        }
    }
}

impl Default for De2000Params {
    fn default() -> Self {
        Self {
            kl: 1.0,
            kc: 1.0,
            kh: 1.0,
        }
    }
}

// 25^7
const POW25_7: f64 = 6_103_515_625.0;

#[inline]
fn hue_degrees(b: f64, a_prime: f64) -> f64 {
    if b == 0.0 && a_prime == 0.0 {
        return 0.0;
    }
    let h = b.atan2(a_prime).to_degrees();
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

/// CIEDE2000 color difference between two Lab colors.
///
/// The arguments are put in a canonical order before evaluation so the
/// result is bit-identical under swapping.
pub fn delta_e_2000(c1: LabColor, c2: LabColor, params: De2000Params) -> f64 {
    let key = |c: &LabColor| [c.l, c.a, c.b];
    let swap = key(&c1)
        .iter()
        .zip(key(&c2).iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        == Some(std::cmp::Ordering::Greater);
    let (c1, c2) = if swap { (c2, c1) } else { (c1, c2) };

    let c1_ab = c1.a.hypot(c1.b);
    let c2_ab = c2.a.hypot(c2.b);
    let c_bar = 0.5 * (c1_ab + c2_ab);
    let c_bar7 = c_bar.powi(7);
    let g = 0.5 * (1.0 - (c_bar7 / (c_bar7 + POW25_7)).sqrt());

    let a1p = (1.0 + g) * c1.a;
    let a2p = (1.0 + g) * c2.a;
    let c1p = a1p.hypot(c1.b);
    let c2p = a2p.hypot(c2.b);
    let h1p = hue_degrees(c1.b, a1p);
    let h2p = hue_degrees(c2.b, a2p);

    let dl = c2.l - c1.l;
    let dc = c2p - c1p;
    let chroma_product = c1p * c2p;
    let dhp = if chroma_product == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let dh = 2.0 * chroma_product.sqrt() * (dhp.to_radians() * 0.5).sin();

    let l_bar = 0.5 * (c1.l + c2.l);
    let cp_bar = 0.5 * (c1p + c2p);
    let hp_sum = h1p + h2p;
    let hp_bar = if chroma_product == 0.0 {
        hp_sum
    } else if (h1p - h2p).abs() <= 180.0 {
        0.5 * hp_sum
    } else if hp_sum < 360.0 {
        0.5 * (hp_sum + 360.0)
    } else {
        0.5 * (hp_sum - 360.0)
    };

    let t = 1.0 - 0.17 * (hp_bar - 30.0).to_radians().cos()
        + 0.24 * (2.0 * hp_bar).to_radians().cos()
        + 0.32 * (3.0 * hp_bar + 6.0).to_radians().cos()
        - 0.20 * (4.0 * hp_bar - 63.0).to_radians().cos();
    let d_theta = 30.0 * (-((hp_bar - 275.0) / 25.0).powi(2)).exp();
    let cp_bar7 = cp_bar.powi(7);
    let rc = 2.0 * (cp_bar7 / (cp_bar7 + POW25_7)).sqrt();
    let l50 = (l_bar - 50.0).powi(2);
    let sl = 1.0 + 0.015 * l50 / (20.0 + l50).sqrt();
    let sc = 1.0 + 0.045 * cp_bar;
    let sh = 1.0 + 0.015 * cp_bar * t;
    let rt = -(2.0 * d_theta).to_radians().sin() * rc;

    let tl = dl / (params.kl * sl);
    let tc = dc / (params.kc * sc);
    let th = dh / (params.kh * sh);
    (tl * tl + tc * tc + th * th + rt * tc * th).max(0.0).sqrt()
}
