//! Locale-free float formatting with 17 significant digits, enough for any
//! f64 to survive a text round trip.

pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0.0".into()
        } else {
            "0.0".into()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s)
    } else {
        let s = format!("{x:.16e}");
        match s.split_once('e') {
            Some((mantissa, e)) => format!("{}e{e}", trim_zeros(mantissa)),
            None => s,
        }
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

pub fn opt17(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [
            0.461_068_504_447_894_5,
            -1.0,
            1.0 / 3.0,
            1e-300,
            -2.5e-7,
            6.02214076e23,
            123456789.123,
            f64::MIN_POSITIVE,
            f64::MAX,
        ] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn plain_shapes() {
        assert_eq!(sig17(-1.0), "-1.0");
        assert_eq!(sig17(0.5), "0.5");
        assert_eq!(sig17(0.0), "0.0");
        assert_eq!(sig17(1e22), "1.0e22");
        assert_eq!(opt17(None), "");
    }
}
