//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines appear in order; exits nonzero if any line fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};

use dircomplex::covering::{
    certified_lower, cover_exact, cover_exact_partial, cover_greedy, separated_lower, span_measure, DistanceMatrix,
};
use dircomplex::metrics::{Family, MetricSeq};
use dircomplex::rng::seeded;
use dircomplex::spectral::orbit_cover_number;
use dircomplex::systems::{sample_measure, FullShift, PermutationSystem, RotationSystem, SkewShift};
use dircomplex::{ActionSystem, Direction, Slope};
use rand::Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn slopes() -> [Slope; 3] {
    [Slope::integer(0), Slope::integer(1), Slope::Float(std::f64::consts::SQRT_2)]
}

fn rotation() -> RotationSystem {
    RotationSystem::new(&[std::f64::consts::SQRT_2 - 1.0, (5f64.sqrt() - 1.0) / 2.0]).unwrap()
}

// ---- 1: metric ordering -------------------------------------------------

const K_TRACE: usize = 12;

/// Draws one pair (half of them close) and checks every depth.
fn ordered_pair<S: ActionSystem>(sys: &S, rng: &mut dircomplex::rng::SampleRng) -> Result<(), String> {
    let beta = slopes()[rng.gen_range(0..3)];
    let b = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
    let d = Direction::planar(beta, b).map_err(|e| e.to_string())?;
    let x = sys.sample_point(rng);
    let y = if rng.gen_bool(0.5) {
        sys.perturb(&x, rng.gen_range(0..8), rng)
    } else {
        sys.sample_point(rng)
    };
    let t = MetricSeq::directional(sys, Family::Mean, d)
        .trace(&x, &y, K_TRACE)
        .map_err(|e| e.to_string())?;
    for i in 0..K_TRACE {
        ensure(t.bowen[i] >= t.maxmean[i] && t.maxmean[i] >= t.mean[i], || {
            format!("{}: order broken at k={} ({:?})", sys.describe(), i + 1, (t.bowen[i], t.maxmean[i], t.mean[i]))
        })?;
        if i > 0 {
            ensure(t.bowen[i] >= t.bowen[i - 1] && t.maxmean[i] >= t.maxmean[i - 1], || {
                format!("{}: not monotone at k={}", sys.describe(), i + 1)
            })?;
        }
    }
    Ok(())
}

fn metric_ordering() -> Outcome {
    const DRAWS: usize = 10_000;
    let rot = rotation();
    let full = FullShift::new(2, 40).unwrap();
    let skew = SkewShift::new(2, 40).unwrap();
    let perm = PermutationSystem::cyclic(7, 1, 3).unwrap();
    let mut rng = seeded(1);
    for i in 0..DRAWS {
        match i % 4 {
            0 => ordered_pair(&rot, &mut rng)?,
            1 => ordered_pair(&full, &mut rng)?,
            2 => ordered_pair(&skew, &mut rng)?,
            _ => ordered_pair(&perm, &mut rng)?,
        }
    }
    Ok(format!("{DRAWS} draws, k 1..{K_TRACE}"))
}

// ---- 2: exact cover against brute force ----------------------------------

fn covered(dm: &DistanceMatrix, eps: f64, centers: &[usize]) -> usize {
    (0..dm.len()).filter(|&j| centers.iter().any(|&c| dm.get(c, j) < eps)).count()
}

/// Smallest subset of sample centres covering `target` points, by enumeration.
fn brute_force(dm: &DistanceMatrix, eps: f64, target: usize) -> usize {
    let n = dm.len();
    (0u32..1 << n)
        .filter(|mask| {
            let centers: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            covered(dm, eps, &centers) >= target
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

fn random_instance(rng: &mut dircomplex::rng::SampleRng, i: usize) -> DistanceMatrix {
    let n = rng.gen_range(1..=12);
    match i % 3 {
        0 => {
            let xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            DistanceMatrix::from_fn(n, |a, b| (xs[a] - xs[b]).abs())
        }
        1 => {
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
            DistanceMatrix::from_fn(n, |a, b| (pts[a].0 - pts[b].0).hypot(pts[a].1 - pts[b].1))
        }
        _ => {
            let sys = FullShift::new(2, 12).unwrap();
            let d = Direction::planar(Slope::integer(1), 1.0).unwrap();
            let pts = sample_measure(&sys, n, rng.gen()).unwrap();
            MetricSeq::directional(&sys, Family::Mean, d).eval_matrix(&pts, 3).unwrap()
        }
    }
}

fn exact_cover() -> Outcome {
    const INSTANCES: usize = 200;
    let mut rng = seeded(2);
    for i in 0..INSTANCES {
        let dm = random_instance(&mut rng, i);
        let n = dm.len();
        let eps = rng.gen_range(0.05..0.6);
        let exact = cover_exact(&dm, eps, 1_000_000).ok_or("search budget exhausted")?.size;
        let brute = brute_force(&dm, eps, n);
        ensure(exact == brute, || format!("instance {i}: exact {exact}, brute force {brute}"))?;
        let sep = separated_lower(&dm, 2.0 * eps);
        let greedy = cover_greedy(&dm, eps).size;
        ensure(sep <= exact && exact <= greedy, || format!("instance {i}: sandwich {sep} ≤ {exact} ≤ {greedy} fails"))?;
        let target = rng.gen_range(0..=n);
        let partial = cover_exact_partial(&dm, eps, target, 1_000_000).ok_or("search budget exhausted")?.size;
        let brute = brute_force(&dm, eps, target);
        ensure(partial == brute, || format!("instance {i}: partial exact {partial}, brute force {brute}"))?;
        let lower = certified_lower(&dm, eps, target);
        ensure(lower <= partial, || format!("instance {i}: certified lower {lower} > {partial}"))?;
    }
    Ok(format!("{INSTANCES} instances, N ≤ 12, full and partial targets"))
}

// ---- 3–6: reference systems, read from a zoo-check run -------------------

fn cells(summary: &Value) -> Result<Vec<&Value>, String> {
    summary["cells"].as_array().map(|c| c.iter().collect()).ok_or_else(|| "summary has no cells".into())
}

fn entry<'a>(list: &'a Value, family: &str, b: f64) -> Result<&'a Value, String> {
    list.as_array()
        .and_then(|l| l.iter().find(|e| e["family"] == family && e["b"].as_f64() == Some(b)))
        .ok_or_else(|| format!("no {family} entry at b={b}"))
}

fn label(v: &Value) -> &str {
    v["label"].as_str().unwrap_or("?")
}

fn decisive(l: &str) -> bool {
    l == "BOUNDED" || l == "GROWING"
}

fn tag(cell: &Value) -> String {
    format!("{} β={}", cell["system"].as_str().unwrap_or("?"), cell["beta"].as_str().unwrap_or("?"))
}

fn covering_vs_modulus(summary: &Value, manifest: &Value) -> Outcome {
    let topo = &manifest["config"]["topological"];
    ensure(topo["k"] == serde_json::json!([1, 2, 4, 8, 16, 32]), || "topological k grid differs".into())?;
    ensure(topo["eps"] == serde_json::json!([0.5, 0.25, 0.125]), || "topological ε grid differs".into())?;
    ensure(manifest["config"]["b"] == serde_json::json!([1.0]), || "topological b is not 1".into())?;
    let wanted = |c: &Value| match (c["system"].as_str(), c["beta"].as_str()) {
        (Some("rotation" | "fullshift"), _) => true,
        (Some("skewshift"), Some("0" | "1")) => true,
        _ => false,
    };
    let mut n = 0;
    for cell in cells(summary)?.into_iter().filter(|c| wanted(c)) {
        for family in ["bowen", "maxmean"] {
            let cover = label(entry(&cell["topological"], family, 1.0)?);
            let modulus = entry(&cell["modulus"], family, 1.0)?["pass"].as_bool().unwrap_or(false);
            ensure(decisive(cover) && (cover == "BOUNDED") == modulus, || {
                format!("{} {family}: covering {cover}, modulus pass {modulus}", tag(cell))
            })?;
            n += 1;
        }
    }
    ensure(n == 16, || format!("expected 16 comparisons, found {n}"))?;
    Ok(format!("{n} system/direction/family comparisons"))
}

fn mean_across_b(summary: &Value) -> Outcome {
    let mut n = 0;
    for cell in cells(summary)? {
        let labels: Vec<&str> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&b| entry(&cell["measure"], "mean", b).map(label))
            .collect::<Result<_, _>>()?;
        ensure(decisive(labels[0]) && labels.iter().all(|l| *l == labels[0]), || {
            format!("{}: mean verdicts {labels:?} across b", tag(cell))
        })?;
        let spectral = cell["spectral"][0]["verdict"].as_str().unwrap_or("?");
        let expected = if labels[0] == "BOUNDED" { "DISCRETE-LIKE" } else { "NON-DISCRETE" };
        ensure(spectral == expected, || format!("{}: mean {}, spectral {spectral}", tag(cell), labels[0]))?;
        n += 1;
    }
    Ok(format!("{n} system/direction cells"))
}

fn suspension(summary: &Value) -> Outcome {
    let mut pairs = 0;
    let mut n = 0;
    for cell in cells(summary)? {
        let s = &cell["suspension"];
        ensure(s["agreement"] == true && s["decisive"] == true, || {
            format!("{}: suspension verdict {} disagrees", tag(cell), s["verdict"])
        })?;
        let dom = &s["domination"];
        let p = dom["pairs"].as_u64().unwrap_or(0);
        ensure(p >= 1000 && dom["violations"] == 0, || format!("{}: domination {dom}", tag(cell)))?;
        pairs += p;
        n += 1;
    }
    ensure(n == 12, || format!("expected 4 systems × 3 slopes, found {n}"))?;
    Ok(format!("{n} cross-validations, {pairs} shared-fiber pairs"))
}

fn maxmean_vs_mean(summary: &Value) -> Outcome {
    let mut n = 0;
    for cell in cells(summary)? {
        for b in [0.5, 1.0, 2.0] {
            let mean = label(entry(&cell["measure"], "mean", b)?);
            let maxmean = label(entry(&cell["measure"], "maxmean", b)?);
            ensure(decisive(mean) && mean == maxmean, || format!("{} b={b}: mean {mean}, maxmean {maxmean}", tag(cell)))?;
            n += 1;
        }
    }
    Ok(format!("{n} cells"))
}

// ---- 7: spot values --------------------------------------------------------

fn spot_values() -> Outcome {
    let rot = rotation();
    for beta in slopes() {
        let d = Direction::planar(beta, 1.0).map_err(|e| e.to_string())?;
        let ms = MetricSeq::directional(&rot, Family::Mean, d);
        for k in [1, 2, 4, 8, 16, 32, 64] {
            let cell = span_measure(&ms, k, 0.25, 384, 7, 100_000).map_err(|e| e.to_string())?;
            ensure(cell.exact == Some(2), || format!("rotation span_μ(k={k}, 0.25) = {:?}", cell.exact))?;
        }
    }

    let skew = SkewShift::new(2, 150).unwrap();
    let d = Direction::planar(Slope::integer(1), 1.0).unwrap();
    let sample = sample_measure(&skew, 256, 8).map_err(|e| e.to_string())?;
    let mut worst = 0;
    for f in skew.observables() {
        for k in [1, 2, 4, 8, 16, 32, 64, 128] {
            for eps in [0.5, 0.3] {
                let c = orbit_cover_number(&skew, &f, &d, &sample, k, eps, 2000).map_err(|e| e.to_string())?;
                worst = worst.max(c.upper());
            }
        }
    }
    ensure(worst <= 3, || format!("skew β=1 orbit cover number reaches {worst}"))?;

    let full = FullShift::new(2, 24).unwrap();
    let d = Direction::planar(Slope::integer(0), 1.0).unwrap();
    let ms = MetricSeq::directional(&full, Family::Bowen, d);
    let sample = sample_measure(&full, 1024, 9).map_err(|e| e.to_string())?;
    let seps: Vec<usize> = [1, 2, 4, 8]
        .iter()
        .map(|&k| ms.eval_matrix(&sample, k).map(|dm| separated_lower(&dm, 2.0 * 0.5)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(seps.windows(2).all(|w| w[0] < w[1]), || format!("fullshift separated lower {seps:?}"))?;
    Ok(format!("rotation exact 2, skew orbit cover ≤ {worst}, fullshift separated {seps:?}"))
}

// ---- 8: reproducibility ------------------------------------------------------

fn zoo_check(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_dircomplex"))
        .arg("zoo-check")
        .arg("--out")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
    let mut files = BTreeMap::new();
    for e in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        files.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn identical(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Outcome {
    ensure(a.keys().eq(b.keys()), || "different file sets".into())?;
    for (name, bytes) in a {
        ensure(b[name] == *bytes, || format!("{name} differs"))?;
    }
    Ok(format!("{} files byte-identical", a.len()))
}

fn json(files: &BTreeMap<String, Vec<u8>>, name: &str) -> Result<Value, String> {
    let bytes = files.get(name).ok_or_else(|| format!("{name} missing"))?;
    serde_json::from_slice(bytes).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| {
        match outcome {
            Ok(detail) => println!("criterion {n} PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL {name}: {why}");
            }
        }
    };
    report(1, "metric ordering", metric_ordering());
    report(2, "exact cover", exact_cover());

    let tmp = tempfile::tempdir().expect("temp dir");
    let first = zoo_check(&tmp.path().join("a"));
    let second = zoo_check(&tmp.path().join("b"));
    let parsed = first
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|f| Ok((json(f, "summary.json")?, json(f, "manifest.json")?)));
    let on_zoo = |check: &dyn Fn(&Value, &Value) -> Outcome| match &parsed {
        Ok((summary, manifest)) => check(summary, manifest),
        Err(e) => Err(format!("zoo-check failed: {e}")),
    };
    report(3, "covering vs modulus", on_zoo(&covering_vs_modulus));
    report(4, "mean across b and spectral", on_zoo(&|s, _| mean_across_b(s)));
    report(5, "suspension cross-validation", on_zoo(&|s, _| suspension(s)));
    report(6, "maxmean vs mean", on_zoo(&|s, _| maxmean_vs_mean(s)));
    report(7, "spot values", spot_values());
    let repro = match (&first, &second) {
        (Ok(a), Ok(b)) => identical(a, b),
        (Err(e), _) | (_, Err(e)) => Err(format!("zoo-check failed: {e}")),
    };
    report(8, "zoo-check reproducible", repro);

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
