//! Plain-text file formats.
//!
//! * points: `x y` per line, header `# scale_exp=m`
//! * tubes: `theta offset width` per line, optional `# scale_exp=m`
//! * measures: `depth ix [iy] mass` per line, header `# dim=d T=.. m=..`
//! * profiles: `k phi_k` per line, header `# T=.. eta=..`
//!
//! Decimals are written in shortest round-trip form. Lines starting with
//! `#` are comments unless they carry a recognised `key=value`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::geometry::{Line, Point2, PointSet, Scale, Tube, TubeSet};
use crate::uniformization::{DyadicMeasure, Piece, UniformityProfile};

/// Writes through a temporary sibling and renames, so a failed run never
/// leaves a truncated file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::param(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Header keys from `# key=value ...` lines and the remaining data lines
/// with their 1-based numbers.
fn split(text: &str) -> (BTreeMap<String, String>, Vec<(usize, &str)>) {
    let mut header = BTreeMap::new();
    let mut data = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for tok in rest.split_whitespace() {
                if let Some((k, v)) = tok.split_once('=') {
                    header.insert(k.to_string(), v.to_string());
                }
            }
            continue;
        }
        data.push((i + 1, line));
    }
    (header, data)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn floats<const N: usize>(line: usize, s: &str) -> Result<[f64; N]> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    if toks.len() != N {
        return Err(parse_err(line, format!("expected {N} numbers, found {}", toks.len())));
    }
    let mut out = [0.0; N];
    for (o, t) in out.iter_mut().zip(toks) {
        *o = t
            .parse()
            .map_err(|_| parse_err(line, format!("'{t}' is not a number")))?;
    }
    Ok(out)
}

fn header_value<T: std::str::FromStr>(h: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    h.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| parse_err(1, format!("bad header value {key}={v}")))
        })
        .transpose()
}

pub fn format_points(p: &PointSet) -> String {
    let mut s = format!("# scale_exp={}\n", p.scale().exp());
    for q in p.points() {
        s.push_str(&format!("{:?} {:?}\n", q.x, q.y));
    }
    s
}

/// Parses a point file; `fallback` supplies the scale when the header has
/// none.
pub fn parse_points(text: &str, fallback: Option<Scale>) -> Result<PointSet> {
    let (h, data) = split(text);
    let scale = match header_value::<u32>(&h, "scale_exp")? {
        Some(m) => Scale::new(m),
        None => fallback.ok_or_else(|| parse_err(1, "missing '# scale_exp=m' header"))?,
    };
    let pts = data
        .into_iter()
        .map(|(n, l)| floats::<2>(n, l).map(|[x, y]| Point2::new(x, y)))
        .collect::<Result<Vec<_>>>()?;
    PointSet::new(pts, scale)
}

/// Raw points, without separation or window checks.
pub fn parse_raw_points(text: &str) -> Result<Vec<Point2>> {
    let (_, data) = split(text);
    data.into_iter()
        .map(|(n, l)| floats::<2>(n, l).map(|[x, y]| Point2::new(x, y)))
        .collect()
}

pub fn format_tubes(t: &TubeSet, scale: Option<Scale>) -> String {
    let mut s = String::new();
    if let Some(sc) = scale {
        s.push_str(&format!("# scale_exp={}\n", sc.exp()));
    }
    for tube in t.iter() {
        s.push_str(&format!(
            "{:?} {:?} {:?}\n",
            tube.line.theta(),
            tube.line.offset(),
            tube.width()
        ));
    }
    s
}

pub fn parse_tubes(text: &str) -> Result<(TubeSet, Option<Scale>)> {
    let (h, data) = split(text);
    let scale = header_value::<u32>(&h, "scale_exp")?.map(Scale::new);
    let tubes = data
        .into_iter()
        .map(|(n, l)| {
            let [theta, offset, width] = floats::<3>(n, l)?;
            let line = Line::new(theta, offset);
            if !line.is_finite() {
                return Err(parse_err(n, "non-finite line"));
            }
            Tube::new(line, width).map_err(|e| parse_err(n, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((TubeSet::new(tubes), scale))
}

fn path_coords(path: &[u8], dim: u32) -> Vec<BigUint> {
    let mut coords = vec![BigUint::default(); dim as usize];
    for &g in path {
        for (axis, c) in coords.iter_mut().enumerate() {
            *c <<= 1u32;
            if (g >> axis) & 1 == 1 {
                *c += 1u32;
            }
        }
    }
    coords
}

fn coords_path(coords: &[BigUint], depth: usize) -> Vec<u8> {
    (0..depth)
        .map(|i| {
            let bit = (depth - 1 - i) as u64;
            coords
                .iter()
                .enumerate()
                .map(|(axis, c)| (c.bit(bit) as u8) << axis)
                .sum()
        })
        .collect()
}

pub fn format_measure(mu: &DyadicMeasure) -> String {
    let mut s = format!("# dim={} T={} m={}\n", mu.dim(), mu.block(), mu.blocks());
    for p in mu.pieces() {
        s.push_str(&p.path.len().to_string());
        for c in path_coords(&p.path, mu.dim()) {
            s.push(' ');
            s.push_str(&c.to_string());
        }
        s.push_str(&format!(" {:?}\n", p.mass));
    }
    s
}

pub fn parse_measure(text: &str) -> Result<DyadicMeasure> {
    let (h, data) = split(text);
    let need = |k: &str| -> Result<u32> {
        header_value::<u32>(&h, k)?.ok_or_else(|| parse_err(1, format!("missing header key {k}")))
    };
    let (dim, block, blocks) = (need("dim")?, need("T")?, need("m")?);
    if !(1..=2).contains(&dim) {
        return Err(parse_err(1, "dim must be 1 or 2"));
    }
    let mut pieces = Vec::with_capacity(data.len());
    for (n, line) in data {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != dim as usize + 2 {
            return Err(parse_err(n, format!("expected depth, {dim} indices and a mass")));
        }
        let depth: usize = toks[0]
            .parse()
            .map_err(|_| parse_err(n, format!("bad depth '{}'", toks[0])))?;
        let limit = BigUint::from(1u32) << depth;
        let coords = toks[1..=dim as usize]
            .iter()
            .map(|t| {
                let c: BigUint = t.parse().map_err(|_| parse_err(n, format!("bad index '{t}'")))?;
                if c >= limit {
                    return Err(parse_err(n, format!("index {c} outside [0, 2^{depth})")));
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        let mass: f64 = toks[dim as usize + 1]
            .parse()
            .map_err(|_| parse_err(n, "bad mass"))?;
        pieces.push(Piece {
            path: coords_path(&coords, depth),
            mass,
        });
    }
    DyadicMeasure::new(dim, block, blocks, pieces)
}

pub fn format_profile(p: &UniformityProfile) -> String {
    let mut s = format!("# T={} eta={:?}\n", p.block, p.eta);
    for k in p.levels() {
        s.push_str(&format!("{k} {:?}\n", p.phi(k).expect("level in range")));
    }
    s
}

pub fn parse_profile(text: &str) -> Result<UniformityProfile> {
    let (h, data) = split(text);
    let block: u32 = header_value(&h, "T")?.ok_or_else(|| parse_err(1, "missing header key T"))?;
    let eta: f64 = header_value(&h, "eta")?.ok_or_else(|| parse_err(1, "missing header key eta"))?;
    if !(eta > 0.0) {
        return Err(parse_err(1, "eta must be positive"));
    }
    let mut start = None;
    let mut classes = Vec::new();
    for (n, line) in data {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(n, "expected 'k phi_k'"));
        }
        let k: u32 = toks[0].parse().map_err(|_| parse_err(n, "bad level"))?;
        let phi: f64 = toks[1].parse().map_err(|_| parse_err(n, "bad phi"))?;
        let expect = start.map_or(k, |s: u32| s + classes.len() as u32);
        if k != expect {
            return Err(parse_err(n, format!("levels must be consecutive, expected {expect}")));
        }
        start.get_or_insert(k);
        let j = (phi / eta).round();
        if !(j >= 0.0) || (j * eta - phi).abs() > 1e-9 {
            return Err(parse_err(n, format!("phi {phi} is not a multiple of eta {eta}")));
        }
        if j > u32::MAX as f64 {
            return Err(parse_err(n, "phi too large"));
        }
        classes.push(j as u32);
    }
    UniformityProfile::from_classes(block, eta, start.ok_or(Error::Empty("profile"))?, classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn points_round_trip() {
        let p = PointSet::new(
            vec![Point2::new(0.1, 1.0 / 3.0), Point2::new(-1.75, 2.0)],
            Scale::new(9),
        )
        .unwrap();
        let text = format_points(&p);
        assert!(text.starts_with("# scale_exp=9\n"));
        assert_eq!(parse_points(&text, None).unwrap(), p);
        assert!(parse_points("0.1 0.2\n", None).is_err());
        assert!(matches!(
            parse_points("# scale_exp=3\n0.1 zz\n", None),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn tubes_round_trip() {
        let t = TubeSet::new(vec![
            Tube::new(Line::new(0.3, -0.2), 0.01).unwrap(),
            Tube::new(Line::new(3.0, 1.1), 0.5).unwrap(),
        ]);
        let (back, sc) = parse_tubes(&format_tubes(&t, Some(Scale::new(4)))).unwrap();
        assert_eq!(sc, Some(Scale::new(4)));
        assert_eq!(back.tubes, t.tubes);
        assert!(parse_tubes("0 0 0\n").is_err());
    }

    #[test]
    fn measure_round_trip_deep() {
        let path: Vec<u8> = (0..156).map(|i| (i * 7 % 4) as u8).collect();
        let mu = DyadicMeasure::dirac(2, 26, 6, path, 0.5).unwrap();
        let text = format_measure(&mu);
        assert_eq!(parse_measure(&text).unwrap(), mu);
        let mu = crate::generators::random_measure(2, 3, 4, 5, 40).unwrap();
        assert_eq!(parse_measure(&format_measure(&mu)).unwrap(), mu);
        let one = DyadicMeasure::lebesgue(1, 2, 2).unwrap();
        assert_eq!(format_measure(&one), "# dim=1 T=2 m=2\n0 0 1.0\n");
        assert!(parse_measure("# dim=2 T=1 m=2\n1 2 0 1.0\n").is_err());
    }

    #[test]
    fn profile_round_trip() {
        let p = UniformityProfile::from_classes(11, 0.5, 1, vec![2, 3, 3, 4]).unwrap();
        let text = format_profile(&p);
        assert!(text.starts_with("# T=11 eta=0.5\n1 1.0\n"));
        assert_eq!(parse_profile(&text).unwrap(), p);
        assert!(parse_profile("# T=1 eta=0.5\n1 0.3\n").is_err());
        assert!(parse_profile("# T=1 eta=0.5\n1 0.5\n3 0.5\n").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.txt");
        write_atomic(&f, "one").unwrap();
        write_atomic(&f, "two").unwrap();
        assert_eq!(fs::read_to_string(&f).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/x.txt"), "x").is_err());
    }

    proptest! {
        #[test]
        fn path_coordinates_invert(path in proptest::collection::vec(0u8..4, 0..200)) {
            let c = path_coords(&path, 2);
            prop_assert_eq!(coords_path(&c, path.len()), path);
        }

        #[test]
        fn floats_round_trip(x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let p = PointSet::new(vec![Point2::new(x, y)], Scale::new(20)).unwrap();
            prop_assert_eq!(parse_points(&format_points(&p), None).unwrap(), p);
        }
    }
}
