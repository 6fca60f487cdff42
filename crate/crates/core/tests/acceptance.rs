//! Acceptance checks, one PASS/FAIL line per criterion. Runs sequentially so the
//! timing check is not disturbed by other tests.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use udcdma::channel::{crossing_db, noise_std, transmit};
use udcdma::codebook::to_binary;
use udcdma::decode::{affine_receive, FdaDecoder, NdaDecoder};
use udcdma::field16::{elementwise_mul, field_add, phi, phi_inv};
use udcdma::fixtures;
use udcdma::verify::{count_forbidden_pairs, enumerate_b8_plus, verify_max_append};
use udcdma::verify::{
    is_binary_ud_exhaustive, is_ud_exhaustive, is_ud_mitm, is_ud_sampled, min_distance, MitmConfig,
};
use udcdma::{build_code_set, run_ber, CodeSet, DecoderKind, FdaConfig, FieldElem, GroupVector, SeedVariant, SimConfig};

use SeedVariant::{Eq10, Eq14};

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, what: String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what)
    }
}

fn code(l: usize, v: SeedVariant) -> std::result::Result<CodeSet, String> {
    build_code_set(l, v).map_err(|e| e.to_string())
}

fn random_bits(rng: &mut ChaCha8Rng, k: usize) -> Vec<i8> {
    (0..k).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

fn all_bits(k: usize) -> impl Iterator<Item = Vec<i8>> {
    (0u32..1 << k).map(move |m| (0..k).map(|j| if m >> j & 1 == 1 { -1 } else { 1 }).collect())
}

fn construction() -> Check {
    let cases = [
        ("C4x5", 4, Eq14, fixtures::C4X5),
        ("C8x13 EQ14", 8, Eq14, fixtures::C8X13_EQ14),
        ("C8x13 EQ10", 8, Eq10, fixtures::C8X13_EQ10),
        ("C16x33 EQ14", 16, Eq14, fixtures::C16X33_EQ14),
    ];
    for (name, l, v, text) in cases {
        let built = code(l, v)?;
        let want = fixtures::parse(text);
        let bad = built.entries().iter().zip(want.entries()).filter(|(a, b)| a != b).count();
        ensure(built.l() == want.l() && built.k() == want.k() && bad == 0, format!("{name}: {bad} mismatched entries"))?;
    }
    Ok("4 fixtures bit-exact".into())
}

fn ud_property() -> Check {
    for (name, l, v) in [("C4x5", 4, Eq14), ("C8x13 EQ14", 8, Eq14), ("C8x13 EQ10", 8, Eq10)] {
        let verdict = is_ud_exhaustive(&code(l, v)?).map_err(|e| e.to_string())?;
        ensure(verdict.is_pass(), format!("{name} exhaustive: {verdict:?}"))?;
    }
    let c16 = code(16, Eq14)?;
    let t = Instant::now();
    let verdict = is_ud_mitm(&c16, &MitmConfig::default()).map_err(|e| e.to_string())?;
    ensure(verdict.is_pass(), format!("C16x33 mitm: {verdict:?}"))?;
    let mitm_s = t.elapsed().as_secs_f64();
    let verdict = is_ud_sampled(&c16, 10_000_000, 17).map_err(|e| e.to_string())?;
    ensure(verdict.is_pass(), format!("C16x33 sampled: {verdict:?}"))?;
    Ok(format!("exhaustive on 3 sets, C16x33 mitm in {mitm_s:.1}s, 1e7 sampled pairs"))
}

fn distance() -> Check {
    for v in [Eq10, Eq14] {
        let d = min_distance(&code(8, v)?).map_err(|e| e.to_string())?;
        ensure(d.d_min == 4, format!("C8x13 {v:?}: d_min {}", d.d_min))?;
    }
    Ok("d_min = 4 for both C8x13".into())
}

fn appendix_c() -> Check {
    let b = enumerate_b8_plus().len();
    ensure(b == 120, format!("|B8+| = {b}"))?;
    let f = count_forbidden_pairs();
    ensure(f.forbidden == 308 && f.total_pairs == 7140, format!("forbidden {}/{}", f.forbidden, f.total_pairs))?;
    let r = verify_max_append().map_err(|e| e.to_string())?;
    ensure(r.v1_ud && r.v2_ud, format!("V1 UD {}, V2 UD {}", r.v1_ud, r.v2_ud))?;
    ensure(
        r.extensions_tested == 115 && r.extensions_blocked == 115,
        format!("{}/{} extensions blocked", r.extensions_blocked, r.extensions_tested),
    )?;
    Ok("|B8+| = 120, 308/7140 forbidden, V1 and V2 UD, 115/115 extensions blocked".into())
}

fn nda_round_trip() -> Check {
    let c8 = code(8, Eq10)?;
    let d8 = NdaDecoder::new(&c8).map_err(|e| e.to_string())?;
    let mut fails = 0;
    for x in all_bits(c8.k()) {
        let y = c8.mul(&x.iter().map(|&b| b as i32).collect::<Vec<_>>());
        let r = affine_receive(&y, &c8).map_err(|e| e.to_string())?;
        if d8.decode(&r).map(|r| r.bits) != Ok(x) {
            fails += 1;
        }
    }
    ensure(fails == 0, format!("L=8: {fails} failures"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for v in [Eq10, Eq14] {
        let c = code(16, v)?;
        let d = NdaDecoder::new(&c).map_err(|e| e.to_string())?;
        for _ in 0..10_000 {
            let x = random_bits(&mut rng, c.k());
            let y = c.mul(&x.iter().map(|&b| b as i32).collect::<Vec<_>>());
            let r = affine_receive(&y, &c).map_err(|e| e.to_string())?;
            if d.decode(&r).map(|r| r.bits) != Ok(x) {
                fails += 1;
            }
        }
        ensure(fails == 0, format!("L=16 {v:?}: {fails} failures"))?;
    }
    Ok("8192 inputs at L=8, 10^4 random at L=16 (both variants)".into())
}

fn fda_noiseless() -> Check {
    let c8 = code(8, Eq14)?;
    let d8 = FdaDecoder::new(&c8, FdaConfig::default()).map_err(|e| e.to_string())?;
    let (mut fails, mut slow) = (0, 0);
    for x in all_bits(c8.k()) {
        let y = c8.mul_f64(&x.iter().map(|&b| b as f64).collect::<Vec<_>>());
        match d8.decode(&y, 1.0) {
            Ok(r) if r.bits == x => slow += (r.iterations != 1) as u32,
            _ => fails += 1,
        }
    }
    ensure(fails == 0 && slow == 0, format!("L=8: {fails} failures, {slow} multi-iteration decodes"))?;
    let c = code(16, Eq14)?;
    let d = FdaDecoder::new(&c, FdaConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let x = random_bits(&mut rng, c.k());
        let y = c.mul_f64(&x.iter().map(|&b| b as f64).collect::<Vec<_>>());
        if d.decode(&y, 1.0).map(|r| r.bits) != Ok(x) {
            fails += 1;
        }
    }
    ensure(fails == 0, format!("L=16: {fails} failures"))?;
    Ok("8192 inputs at L=8 in 1 iteration each, 10^4 random at L=16".into())
}

fn ber_gap() -> Check {
    let grid: Vec<f64> = (0..=14).map(f64::from).collect();
    let mut parts = Vec::new();
    for l in [4, 8] {
        let mut at = Vec::new();
        for dec in [DecoderKind::Ml, DecoderKind::Fda] {
            let mut cfg = SimConfig::new(l, Eq14, dec, grid.clone());
            cfg.min_bits = 2_000_000;
            cfg.max_errors = None;
            cfg.seed = 1;
            let recs = run_ber(&cfg).map_err(|e| e.to_string())?;
            at.push(crossing_db(&recs, 1e-3).ok_or(format!("L={l} {dec}: no 1e-3 crossing on the grid"))?);
        }
        let gap = at[1] - at[0];
        parts.push(format!("L={l}: ML {:.2} dB, FDA {:.2} dB, gap {gap:.2} dB", at[0], at[1]));
        ensure((0.5..=3.0).contains(&gap), parts.join("; "))?;
    }
    Ok(parts.join("; "))
}

fn fda_scaling() -> Check {
    const EBN0_DB: f64 = 14.0;
    const N: usize = 20_000;
    let mut mean = Vec::new();
    for l in [8, 16] {
        let c = code(l, Eq14)?;
        let d = FdaDecoder::new(&c, FdaConfig::default()).map_err(|e| e.to_string())?;
        let std = noise_std(EBN0_DB, 1.0, l, c.k());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ys: Vec<Vec<f64>> = (0..N)
            .map(|_| {
                let x = random_bits(&mut rng, c.k());
                transmit(&x, &c, 1.0, std, &mut rng)
            })
            .collect();
        let t = Instant::now();
        for y in &ys {
            d.decode(y, 1.0).map_err(|e| e.to_string())?;
        }
        mean.push(t.elapsed().as_secs_f64() / N as f64);
    }
    let ratio = mean[1] / mean[0];
    let msg = format!(
        "at {EBN0_DB} dB: K=13 {:.2} us, K=33 {:.2} us, ratio {ratio:.2}",
        mean[0] * 1e6,
        mean[1] * 1e6
    );
    ensure(ratio < 8.0, msg.clone())?;
    Ok(msg)
}

fn field_suite() -> Check {
    let all: Vec<GroupVector> = GroupVector::all().collect();
    let mut pairs = 0;
    for &u in &all {
        for &v in &all {
            let lhs = phi(elementwise_mul(u, v)).map_err(|e| e.to_string())?;
            let rhs = field_add(phi(u).map_err(|e| e.to_string())?, phi(v).map_err(|e| e.to_string())?);
            ensure(lhs == rhs, format!("phi({u:?} * {v:?})"))?;
            pairs += 1;
        }
    }
    let mut trips = 0;
    for e in FieldElem::all() {
        ensure(phi(phi_inv(e)) == Ok(e), format!("round trip {e}"))?;
        trips += 1;
    }
    let mut negs = 0;
    for &u in &all {
        ensure(phi(u.neg()) == phi(u).map(FieldElem::negated), format!("negation {u:?}"))?;
        negs += 1;
    }
    ensure(pairs == 256 && trips == 16 && negs == 16, format!("{pairs}/{trips}/{negs} checks"))?;
    Ok("256 homomorphism pairs, 16 round trips, 16 negations".into())
}

fn binary_ud() -> Check {
    for (name, l, v) in [("C4x5", 4, Eq14), ("C8x13 EQ14", 8, Eq14), ("C8x13 EQ10", 8, Eq10)] {
        let b = to_binary(&code(l, v)?).map_err(|e| e.to_string())?;
        let verdict = is_binary_ud_exhaustive(&b).map_err(|e| e.to_string())?;
        ensure(verdict.is_pass(), format!("{name}: {verdict:?}"))?;
    }
    Ok("binary C4x5 and both binary C8x13 are UD".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("construction fidelity", construction),
        ("UD property", ud_property),
        ("minimum distance", distance),
        ("B8+ append ledger", appendix_c),
        ("NDA round trip", nda_round_trip),
        ("FDA noiseless exactness", fda_noiseless),
        ("BER gap FDA vs ML", ber_gap),
        ("FDA complexity scaling", fda_scaling),
        ("field isomorphism", field_suite),
        ("binary UD", binary_ud),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = check();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} ({secs:.1}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
