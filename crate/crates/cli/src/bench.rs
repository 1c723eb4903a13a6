//! Reproduction of the timing/traffic experiment: repeated single-segment
//! comparisons with both parties' socket writes counted.
//!
//! Each trial draws one random segment per party inside the coordinate
//! bounds, runs a complete session (key and route transfer plus the
//! encrypted comparison), and records wall time split into setup and
//! comparison phases, plus exact byte counts. Key generation happens once
//! per run and is reported separately, since a drone would reuse its key
//! pair across encounters.

use std::io::Write as _;
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use privpath_core::{
    keygen, AliceSession, BobSession, CountedChannel, Path, Point, PrivateKey,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchConfig {
    pub trials: u32,
    pub coord_min: i64,
    pub coord_max: i64,
    pub key_bits: u64,
    pub seed: Option<u64>,
}

impl Default for BenchConfig {
    fn default() -> BenchConfig {
        BenchConfig {
            trials: 30,
            coord_min: -99,
            coord_max: 99,
            key_bits: 2048,
            seed: None,
        }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            bail!("trials must be >= 1");
        }
        if self.coord_min >= self.coord_max {
            bail!("coordinate range is empty");
        }
        Point::new(self.coord_min, self.coord_min).context("coordinate range out of bounds")?;
        Point::new(self.coord_max, self.coord_max).context("coordinate range out of bounds")?;
        Ok(())
    }

    fn rng(&self) -> ChaCha20Rng {
        match self.seed {
            Some(seed) => ChaCha20Rng::seed_from_u64(seed),
            None => ChaCha20Rng::from_entropy(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TrialRecord {
    pub trial: u32,
    pub alice_segment: [i64; 4],
    /// Absent in split-host mode, where only Bob knows his segment.
    pub bob_segment: Option<[i64; 4]>,
    pub intersects: bool,
    pub setup_s: f64,
    pub compare_s: f64,
    pub total_s: f64,
    pub bytes_total: u64,
    pub bytes_alice_out: u64,
    pub bytes_bob_out: u64,
    pub mult_calls: u64,
    pub sign_calls: u64,
}

impl TrialRecord {
    pub fn to_kv_line(&self) -> String {
        format!(
            "trial={} setup_s={:.4} compare_s={:.4} total_s={:.4} bytes={} mult_calls={} sign_calls={} intersects={}",
            self.trial,
            self.setup_s,
            self.compare_s,
            self.total_s,
            self.bytes_total,
            self.mult_calls,
            self.sign_calls,
            self.intersects
        )
    }
}

/// Published measurements this workload is compared against.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReferenceRow {
    pub approach: String,
    pub time_s: f64,
    pub bytes: u64,
}

pub fn reference_rows() -> Vec<ReferenceRow> {
    vec![
        ReferenceRow {
            approach: "homomorphic comparison, original Java implementation".into(),
            time_s: 4.407,
            bytes: 4634,
        },
        ReferenceRow {
            approach: "garbled-circuit baseline".into(),
            time_s: 6.092,
            bytes: 39221,
        },
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BenchReport {
    pub key_bits: u64,
    pub trials: u32,
    pub seed: Option<u64>,
    pub coord_min: i64,
    pub coord_max: i64,
    pub keygen_s: f64,
    pub records: Vec<TrialRecord>,
    pub mean_setup_s: f64,
    pub mean_compare_s: f64,
    pub mean_total_s: f64,
    pub mean_bytes: f64,
    pub reference: Vec<ReferenceRow>,
}

impl BenchReport {
    fn from_records(cfg: &BenchConfig, keygen_s: f64, records: Vec<TrialRecord>) -> BenchReport {
        let n = records.len() as f64;
        let mean = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / n;
        BenchReport {
            key_bits: cfg.key_bits,
            trials: cfg.trials,
            seed: cfg.seed,
            coord_min: cfg.coord_min,
            coord_max: cfg.coord_max,
            keygen_s,
            mean_setup_s: mean(&|r| r.setup_s),
            mean_compare_s: mean(&|r| r.compare_s),
            mean_total_s: mean(&|r| r.total_s),
            mean_bytes: mean(&|r| r.bytes_total as f64),
            records,
            reference: reference_rows(),
        }
    }

    /// Human-readable report: per-trial key-value lines, the measured means,
    /// and the published reference rows alongside.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_kv_line());
            out.push('\n');
        }
        out.push_str(&format!(
            "key_bits={} trials={} seed={}\n",
            self.key_bits,
            self.trials,
            self.seed.map_or("none".into(), |s| s.to_string()),
        ));
        out.push_str(&format!("keygen_s={:.4}\n", self.keygen_s));
        out.push_str(&format!(
            "mean_setup_s={:.4} mean_compare_s={:.4} mean_total_s={:.4} mean_bytes={:.1}\n",
            self.mean_setup_s, self.mean_compare_s, self.mean_total_s, self.mean_bytes
        ));
        out.push_str(&format!(
            "measured: approach=\"this implementation\" time_s={:.3} bytes={:.0}\n",
            self.mean_total_s, self.mean_bytes
        ));
        for row in &self.reference {
            out.push_str(&format!(
                "reference: approach=\"{}\" time_s={:.3} bytes={}\n",
                row.approach, row.time_s, row.bytes
            ));
        }
        out
    }
}

fn random_segment(rng: &mut ChaCha20Rng, cfg: &BenchConfig) -> Result<Path> {
    let coord = |rng: &mut ChaCha20Rng| rng.gen_range(cfg.coord_min..=cfg.coord_max);
    Ok(Path::new(vec![
        Point::new(coord(rng), coord(rng))?,
        Point::new(coord(rng), coord(rng))?,
    ])?)
}

/// Full benchmark over an in-process loopback channel: Bob's responder runs
/// on a second thread, trials execute sequentially for timing fidelity.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut rng = cfg.rng();

    let keygen_started = Instant::now();
    let (_, sk) = keygen(cfg.key_bits)?;
    let keygen_s = keygen_started.elapsed().as_secs_f64();

    let mut records = Vec::with_capacity(cfg.trials as usize);
    for trial in 1..=cfg.trials {
        let alice_path = random_segment(&mut rng, cfg)?;
        let bob_path = random_segment(&mut rng, cfg)?;
        let record = run_one_trial(trial, &sk, &alice_path, &bob_path)?;
        records.push(record);
    }
    Ok(BenchReport::from_records(cfg, keygen_s, records))
}

fn run_one_trial(
    trial: u32,
    sk: &PrivateKey,
    alice_path: &Path,
    bob_path: &Path,
) -> Result<TrialRecord> {
    let (ch_a, ch_b) = privpath_core::duplex();
    let sk = sk.clone();
    let bob_path_cloned = bob_path.clone();
    let bob = thread::spawn(move || {
        BobSession::new(&sk, &bob_path_cloned).run(CountedChannel::new(ch_b))
    });
    let outcome = AliceSession::new(alice_path).run(CountedChannel::new(ch_a))?;
    let bob_outcome = bob
        .join()
        .map_err(|_| anyhow::anyhow!("responder thread panicked"))??;

    let seg = |p: &Path| {
        let pts = p.points();
        [
            pts[0].x.value(),
            pts[0].y.value(),
            pts[1].x.value(),
            pts[1].y.value(),
        ]
    };
    Ok(TrialRecord {
        trial,
        alice_segment: seg(alice_path),
        bob_segment: Some(seg(bob_path)),
        intersects: !outcome.collisions.is_empty(),
        setup_s: outcome.setup_s,
        compare_s: outcome.compare_s,
        total_s: outcome.metrics.wall_time_s,
        bytes_total: outcome.metrics.bytes_total(),
        bytes_alice_out: outcome.metrics.bytes_out,
        bytes_bob_out: bob_outcome.metrics.bytes_out,
        mult_calls: outcome.metrics.mult_calls,
        sign_calls: outcome.metrics.sign_calls,
    })
}

/// Split-host benchmark, responder side: bind, then serve one session per
/// trial with a fresh random segment each time.
pub fn serve_bench_bob(listen: &str, cfg: &BenchConfig) -> Result<()> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let (_, sk) = keygen(cfg.key_bits)?;
    let listener = TcpListener::bind(listen).with_context(|| format!("binding {listen}"))?;
    eprintln!("bench responder listening on {listen}");
    for trial in 1..=cfg.trials {
        let (stream, peer) = listener.accept()?;
        stream.set_nodelay(true)?;
        let bob_path = random_segment(&mut rng, cfg)?;
        let outcome = BobSession::new(&sk, &bob_path).run(CountedChannel::new(stream))?;
        println!(
            "trial={} peer={} bytes_out={} bytes_in={}",
            trial,
            peer,
            outcome.metrics.bytes_out,
            outcome.metrics.bytes_in
        );
        std::io::stdout().flush().ok();
    }
    Ok(())
}

/// Split-host benchmark, requester side: one connection per trial against a
/// `serve_bench_bob` peer. Key generation happens on the responder, so
/// `keygen_s` is reported as zero here.
pub fn run_bench_alice(connect: &str, cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let mut records = Vec::with_capacity(cfg.trials as usize);
    for trial in 1..=cfg.trials {
        let alice_path = random_segment(&mut rng, cfg)?;
        let stream = TcpStream::connect(connect).with_context(|| format!("connecting {connect}"))?;
        stream.set_nodelay(true)?;
        let outcome = AliceSession::new(&alice_path).run(CountedChannel::new(stream))?;
        let pts = alice_path.points();
        records.push(TrialRecord {
            trial,
            alice_segment: [
                pts[0].x.value(),
                pts[0].y.value(),
                pts[1].x.value(),
                pts[1].y.value(),
            ],
            bob_segment: None,
            intersects: !outcome.collisions.is_empty(),
            setup_s: outcome.setup_s,
            compare_s: outcome.compare_s,
            total_s: outcome.metrics.wall_time_s,
            bytes_total: outcome.metrics.bytes_total(),
            bytes_alice_out: outcome.metrics.bytes_out,
            bytes_bob_out: outcome.metrics.bytes_in,
            mult_calls: outcome.metrics.mult_calls,
            sign_calls: outcome.metrics.sign_calls,
        });
    }
    Ok(BenchReport::from_records(cfg, 0.0, records))
}
