//! Regenerates the bundled price fixtures in `data/`.
//!
//! Weekly closes for 30 tickers over 53 weeks (52 returns), simulated from a
//! market factor, a sector factor and Student-t idiosyncratic noise. The
//! numbers are synthetic; only the ticker lists and the rough scale of
//! weekly equity moves follow the real index universes.
//!
//! ```text
//! cargo run --example generate_fixtures
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};

const WEEKS: usize = 52;

struct Universe {
    file: &'static str,
    seed: u64,
    /// First Monday, as (year, month, day).
    start: (i64, i64, i64),
    drift: f64,
    market_vol: f64,
    tickers: [(&'static str, usize); 30],
}

// (ticker, sector)
const DJIA: Universe = Universe {
    file: "djia30_synthetic_weekly.csv",
    seed: 2012,
    start: (2012, 1, 2),
    drift: 0.0015,
    market_vol: 0.018,
    tickers: [
        ("AA", 0), ("AXP", 1), ("BA", 2), ("BAC", 1), ("CAT", 2), ("CSCO", 3),
        ("CVX", 4), ("DD", 0), ("DIS", 5), ("GE", 2), ("HD", 5), ("HPQ", 3),
        ("IBM", 3), ("INTC", 3), ("JNJ", 6), ("JPM", 1), ("KO", 7), ("MCD", 5),
        ("MMM", 2), ("MRK", 6), ("MSFT", 3), ("PFE", 6), ("PG", 7), ("T", 8),
        ("TRV", 1), ("UNH", 6), ("UTX", 2), ("VZ", 8), ("WMT", 5), ("XOM", 4),
    ],
};

const DAX: Universe = Universe {
    file: "dax30_synthetic_weekly.csv",
    seed: 2013,
    start: (2013, 1, 7),
    drift: 0.0045,
    market_vol: 0.022,
    tickers: [
        ("ADS.DE", 5), ("ALV.DE", 1), ("BAS.DE", 0), ("BAYN.DE", 6), ("BEI.DE", 7),
        ("BMW.DE", 2), ("CBK.DE", 1), ("CON.DE", 2), ("DAI.DE", 2), ("DBK.DE", 1),
        ("DB1.DE", 1), ("LHA.DE", 5), ("DPW.DE", 5), ("DTE.DE", 8), ("EOAN.DE", 4),
        ("FRE.DE", 6), ("FME.DE", 6), ("HEI.DE", 0), ("HEN3.DE", 7), ("IFX.DE", 3),
        ("SDF.DE", 0), ("LXS.DE", 0), ("LIN.DE", 0), ("MRK.DE", 6), ("MUV2.DE", 1),
        ("RWE.DE", 4), ("SAP.DE", 3), ("SIE.DE", 2), ("TKA.DE", 0), ("VOW3.DE", 2),
    ],
};

const SECTORS: usize = 9;

/// Days since 1970-01-01 for a proleptic Gregorian date.
fn days_from_civil(y: i64, m: i64, d: i64) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(z: i64) -> (i64, i64, i64) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + i64::from(m <= 2);
    (y, m, d)
}

fn generate(u: &Universe, dir: &Path) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(u.seed);
    let n = u.tickers.len();
    let beta: Vec<f64> = (0..n).map(|_| rng.random_range(0.6..1.4)).collect();
    let idio_vol: Vec<f64> = (0..n).map(|_| rng.random_range(0.012..0.030)).collect();
    let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(-0.002..0.002)).collect();
    let mut price: Vec<f64> = (0..n).map(|_| rng.random_range(15.0..180.0)).collect();

    let market = Normal::new(u.drift, u.market_vol).unwrap();
    let sector = Normal::new(0.0, 0.010).unwrap();
    let noise = StudentT::new(4.0).unwrap();
    // t(4) has variance 2
    let t_scale = 0.5_f64.sqrt();

    let path = dir.join(u.file);
    let mut out = BufWriter::new(File::create(&path)?);
    let header: Vec<&str> = u.tickers.iter().map(|t| t.0).collect();
    writeln!(out, "date,{}", header.join(","))?;
    let day0 = days_from_civil(u.start.0, u.start.1, u.start.2);
    for week in 0..=WEEKS {
        if week > 0 {
            let f = market.sample(&mut rng);
            let s: Vec<f64> = (0..SECTORS).map(|_| sector.sample(&mut rng)).collect();
            for j in 0..n {
                let eps = noise.sample(&mut rng) * t_scale * idio_vol[j];
                let r = alpha[j] + beta[j] * f + s[u.tickers[j].1] + eps;
                price[j] *= 1.0 + r.max(-0.5);
            }
        }
        let (y, m, d) = civil_from_days(day0 + 7 * week as i64);
        let cells: Vec<String> = price.iter().map(|p| format!("{p:.4}")).collect();
        writeln!(out, "{y:04}-{m:02}-{d:02},{}", cells.join(","))?;
    }
    out.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir)?;
    for u in [&DJIA, &DAX] {
        generate(u, &dir)?;
    }
    Ok(())
}
