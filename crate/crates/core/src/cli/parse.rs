//! Small text formats used on the command line: basis names and test lists.

use crate::basis::BasisSpec;
use crate::gencorr::PcConfig;
use crate::simulate::TestSpec;

/// Basis by name for `d` covariates: `bspline` (cubic, 5 functions per
/// coordinate), `bspline<df>`, `poly<degree>` or `const`.
pub fn parse_basis(name: &str, d: usize) -> Result<BasisSpec, String> {
    let name = name.trim().to_ascii_lowercase();
    if name == "const" || name == "intercept" {
        return Ok(BasisSpec::intercept_only(d));
    }
    if let Some(rest) = name.strip_prefix("bspline") {
        let df = if rest.is_empty() {
            5
        } else {
            rest.parse::<usize>().map_err(|_| format!("bad basis `{name}`"))?
        };
        return BasisSpec::bspline(d, df, 4).map_err(|e| e.to_string());
    }
    if let Some(rest) = name.strip_prefix("poly") {
        let degree = rest.parse::<usize>().map_err(|_| format!("bad basis `{name}`"))?;
        return Ok(BasisSpec::polynomial(d, degree));
    }
    Err(format!(
        "unknown basis `{name}` (expected bspline, bspline<df>, poly<degree> or const)"
    ))
}

/// Parses a comma-separated test list such as `pc:q=3:basis=poly2,gcm:square,npn`.
///
/// `base` supplies every pc option that is not overridden, and `gcm_basis`
/// the default GCM basis; `d` is needed to expand basis names.
pub fn parse_tests(
    list: &str,
    base: &PcConfig,
    gcm_basis: &BasisSpec,
    d: usize,
) -> Result<Vec<TestSpec>, String> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let mut parts = item.split(':');
        let method = parts.next().unwrap_or_default().to_ascii_lowercase();
        let opts: Vec<(&str, Option<&str>)> = parts
            .map(|p| match p.split_once('=') {
                Some((k, v)) => (k.trim(), Some(v.trim())),
                None => (p.trim(), None),
            })
            .collect();
        fn value<'a>(item: &str, key: &str, v: Option<&'a str>) -> Result<&'a str, String> {
            v.ok_or_else(|| format!("option `{key}` of `{item}` needs a value"))
        }
        let spec = match method.as_str() {
            "pc" => {
                let mut cfg = base.clone();
                for (k, v) in opts {
                    let v = value(item, k, v)?;
                    let num = || v.parse::<f64>().map_err(|_| format!("bad value `{v}` for `{k}`"));
                    match k {
                        "q" => {
                            cfg.q = v.parse().map_err(|_| format!("bad value `{v}` for q"))?;
                            if cfg.q == 0 {
                                return Err(format!("q must be >= 1 in `{item}`"));
                            }
                        }
                        "basis" => {
                            let b = parse_basis(v, d)?;
                            cfg.cdf.basis_x = Some(b.clone());
                            cfg.cdf.basis_y = Some(b);
                        }
                        "m" => cfg.cdf.m = Some(v.parse().map_err(|_| format!("bad value `{v}` for m"))?),
                        "tau_min" => cfg.cdf.tau_min = num()?,
                        "tau_max" => cfg.cdf.tau_max = num()?,
                        "delta" => cfg.delta_fraction = num()?,
                        _ => return Err(format!("unknown pc option `{k}`")),
                    }
                }
                cfg.validate().map_err(|e| e.to_string())?;
                TestSpec::Pc(cfg)
            }
            "gcm" => {
                let mut basis = gcm_basis.clone();
                let mut square = false;
                for (k, v) in opts {
                    match k {
                        "basis" => basis = parse_basis(value(item, k, v)?, d)?,
                        "square" => square = v.map_or(Ok(true), |v| v.parse().map_err(|_| format!("bad value `{v}` for square")))?,
                        _ => return Err(format!("unknown gcm option `{k}`")),
                    }
                }
                TestSpec::Gcm {
                    basis: Some(basis),
                    square,
                }
            }
            "npn" => {
                if let Some((k, _)) = opts.first() {
                    return Err(format!("npn takes no options, got `{k}`"));
                }
                TestSpec::Npn
            }
            other => return Err(format!("unknown test `{other}` (expected pc, gcm or npn)")),
        };
        out.push(spec);
    }
    if out.is_empty() {
        return Err("empty test list".into());
    }
    Ok(out)
}
