use std::path::Path;

use cdiff::datagen::{generate_planted_pair, generate_signal_pair, generate_sphere_pair_from};
use cdiff::ecg::{f1_score, run_fecg, BeatEvaluation, FrequencyCurve};
use cdiff::embed::{embed_views, EmbeddingResult};
use cdiff::io::{read_matrix_csv, read_signal_csv, write_matrix_bin, write_matrix_csv, write_signal_csv};
use cdiff::kernels::normalize_kernel;
use cdiff::operators::{build_composite, rank_report, support_mask, RankReport, SupportMask};
use cdiff::spectral::{EigenLabel, Embedding, EmbeddingSource};
use cdiff::ComputeOptions;
use serde::Serialize;

use crate::config::{EmbedConfig, FecgConfig, PlantedConfig, ShapesConfig};
use crate::error::CliError;
use crate::manifest::Artifacts;

#[derive(Serialize)]
struct EmbeddingSidecar<'a> {
    source: EmbeddingSource,
    columns: usize,
    eigen_labels: &'a [EigenLabel],
    eigenvalues: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    degenerate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

fn write_embedding(
    art: &mut Artifacts,
    stem: &str,
    emb: &Embedding,
    degenerate: Option<bool>,
) -> Result<(), CliError> {
    let p = art.path(&format!("{stem}.csv"));
    write_matrix_csv(&p, emb.coords.as_ref())?;
    let note = degenerate.filter(|&d| d).map(|_| "degenerate: A ≈ 0");
    art.json(
        &format!("{stem}.json"),
        &EmbeddingSidecar {
            source: emb.source,
            columns: emb.coords.ncols(),
            eigen_labels: &emb.eigen_labels,
            eigenvalues: &emb.eigenvalues,
            degenerate,
            note,
        },
    )
}

#[derive(Serialize)]
struct Eigenvalues<'a> {
    common: &'a [f64],
    difference: &'a [f64],
    difference_max_abs: f64,
    epsilons: [f64; 4],
}

fn write_embeddings(art: &mut Artifacts, r: &EmbeddingResult) -> Result<(), CliError> {
    art.json(
        "eigenvalues.json",
        &Eigenvalues {
            common: &r.common_eigenvalues,
            difference: &r.difference_spectrum,
            difference_max_abs: r.difference_max_abs,
            epsilons: r.epsilons,
        },
    )?;
    write_embedding(art, "embedding_common", &r.common, None)?;
    write_embedding(art, "embedding_difference", &r.difference, Some(r.degenerate))
}

/// Pearson correlation between a column and a 0/1 mask.
pub fn point_biserial(x: &[f64], mask: &[bool]) -> f64 {
    let n = x.len() as f64;
    let y: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(&y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Share of a column's squared norm that falls on masked samples.
pub fn masked_energy(x: &[f64], mask: &[bool]) -> f64 {
    let total: f64 = x.iter().map(|v| v * v).sum();
    let inside: f64 = x.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| v * v).sum();
    if total > 0.0 { inside / total } else { 0.0 }
}

fn column(m: &cdiff::Matrix, j: usize) -> Vec<f64> {
    m.col(j).iter().copied().collect()
}

pub fn shapes(cfg: &ShapesConfig, out: &Path, opts: &ComputeOptions) -> Result<(), CliError> {
    let mut art = Artifacts::new(out)?;
    let pair = generate_sphere_pair_from(&cfg.sphere)?;
    let p = art.path("shape_view1.csv");
    write_matrix_csv(&p, pair.dataset.view1().as_ref())?;
    let p = art.path("shape_view2.csv");
    write_matrix_csv(&p, pair.dataset.view2().as_ref())?;

    #[derive(Serialize)]
    struct Mask<'a> {
        scale: f64,
        masked: usize,
        bump_mask: &'a [bool],
    }
    let masked = pair.bump_mask.iter().filter(|&&b| b).count();
    art.json("shape_mask.json", &Mask { scale: pair.scale, masked, bump_mask: &pair.bump_mask })?;

    let r = embed_views(pair.dataset.view1().as_ref(), pair.dataset.view2().as_ref(), &cfg.embedding, opts)?;
    write_embeddings(&mut art, &r)?;

    let mask = &pair.bump_mask;
    let n = mask.len();
    let diff_cols = r.difference.coords.ncols();
    let mut report = String::from("index,in_bump,difference_energy,common_1\n");
    for i in 0..n {
        let e: f64 = (0..diff_cols).map(|j| r.difference.coords[(i, j)].powi(2)).sum();
        report.push_str(&format!("{i},{},{e},{}\n", u8::from(mask[i]), r.common.coords[(i, 0)]));
    }
    art.text("bump_energy.csv", &report)?;

    println!("masked samples: {masked} of {n}");
    for j in 0..r.common.coords.ncols() {
        println!("common column {}: |corr with bump| = {:.3}", j + 1, point_biserial(&column(&r.common.coords, j), mask).abs());
    }
    if r.degenerate {
        println!("difference embedding: degenerate: A ≈ 0 (max |A| = {:.3e})", r.difference_max_abs);
    }
    for j in 0..diff_cols {
        println!("difference column {}: bump energy = {:.3}", j + 1, masked_energy(&column(&r.difference.coords, j), mask));
    }
    let manifest = art.finish("shapes", cfg)?;
    println!("wrote {}", manifest.display());
    Ok(())
}

pub fn planted(cfg: &PlantedConfig, out: &Path) -> Result<(), CliError> {
    let indices = cfg.indices();
    let (w1, w2) = generate_planted_pair(cfg.n, &indices, cfg.magnitude, cfg.seed)?;
    let p1 = normalize_kernel(w1.matrix().as_ref())?;
    let p2 = normalize_kernel(w2.matrix().as_ref())?;
    let a = build_composite(&p1, &p2)?.a;
    let report = rank_report(a.as_ref(), Some(indices.len()), cfg.tol_ratio)?;
    let mask = support_mask(a.as_ref(), cfg.mask_threshold)?;

    let mut art = Artifacts::new(out)?;
    let p = art.path("operator_a.bin");
    write_matrix_bin(&p, a.as_ref())?;

    #[derive(Serialize)]
    struct Rank<'a> {
        #[serde(flatten)]
        report: &'a RankReport,
        pass: bool,
    }
    let pass = report.within_bound().unwrap_or(false);
    art.json("rank_report.json", &Rank { report: &report, pass })?;

    #[derive(Serialize)]
    struct MaskOut<'a> {
        #[serde(flatten)]
        mask: &'a SupportMask,
        diff_indices: &'a [usize],
        /// Largest `|a_ij|` with neither index planted; zero in exact arithmetic.
        off_support_max: f64,
    }
    let mut off_support_max = 0.0f64;
    for j in (0..cfg.n).filter(|j| !indices.contains(j)) {
        for i in (0..cfg.n).filter(|i| !indices.contains(i)) {
            off_support_max = off_support_max.max(a[(i, j)].abs());
        }
    }
    art.json("support_mask.json", &MaskOut { mask: &mask, diff_indices: &indices, off_support_max })?;

    println!(
        "rank {} <= bound {}: {}",
        report.numerical_rank,
        2 * indices.len(),
        if pass { "pass" } else { "FAIL" }
    );
    println!(
        "support: {} samples flagged, planted {:?}, max |A| off the planted rows and columns {:.2e}",
        mask.len(),
        indices,
        off_support_max
    );
    art.finish("planted", cfg)?;
    Ok(())
}

fn read_truth(path: &Path) -> Result<Vec<usize>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn fecg(cfg: &FecgConfig, out: &Path, opts: &ComputeOptions) -> Result<(), CliError> {
    let mut art = Artifacts::new(out)?;
    let (s1, s2, fs, truth) = match &cfg.input {
        Some(input) => {
            let (s1, s2) = read_signal_csv(&input.path)?;
            let truth = input.truth.as_deref().map(read_truth).transpose()?;
            (s1, s2, input.fs, truth)
        }
        None => {
            let sig = generate_signal_pair(&cfg.signal)?;
            let p = art.path("signals.csv");
            write_signal_csv(&p, &sig.s1, &sig.s2)?;
            #[derive(Serialize)]
            struct Truth<'a> {
                fs: f64,
                maternal_beats: &'a [usize],
                fetal_beats: &'a [usize],
            }
            art.json(
                "truth.json",
                &Truth { fs: sig.fs, maternal_beats: &sig.maternal_beats, fetal_beats: &sig.fetal_beats },
            )?;
            (sig.s1, sig.s2, sig.fs, Some(sig.fetal_beats))
        }
    };

    let r = run_fecg(&s1, &s2, fs, &cfg.pipeline, opts)?;
    let p = art.path("median_spectrogram.bin");
    write_matrix_bin(&p, r.eigen_median.mag.as_ref())?;

    #[derive(Serialize)]
    struct Axes<'a> {
        freqs_hz: &'a [f64],
        times_s: &'a [f64],
        layout: cdiff::ecg::stft::FrameLayout,
    }
    let spec = &r.eigen_median;
    art.json("median_spectrogram.json", &Axes { freqs_hz: &spec.freqs_hz, times_s: &spec.times_s, layout: spec.layout })?;
    art.json("maternal_curve.json", &r.maternal_curve)?;
    art.json("fetal_curve.json", &r.fetal_curve)?;

    #[derive(Serialize)]
    struct Beats<'a> {
        fs: f64,
        maternal_residual_ratio: f64,
        beats: &'a [usize],
    }
    art.json("beats.json", &Beats { fs, maternal_residual_ratio: r.maternal_residual_ratio, beats: &r.beats })?;

    let median_hz = |c: &FrequencyCurve| {
        let mut v = c.hz.clone();
        v.sort_by(f64::total_cmp);
        v.get(v.len() / 2).copied().unwrap_or(f64::NAN)
    };
    println!(
        "maternal {:.3} Hz, fetal {:.3} Hz, {} beats, maternal residual {:.4}",
        median_hz(&r.maternal_curve),
        median_hz(&r.fetal_curve),
        r.beats.len(),
        r.maternal_residual_ratio
    );
    match truth {
        Some(truth) => {
            let eval: BeatEvaluation = f1_score(&r.beats, &truth, fs, cfg.tol_ms, cfg.guard_s, s1.len());
            println!("F1 {:.4} (SE {:.4}, PPV {:.4})", eval.f1, eval.se, eval.ppv);
            art.json("evaluation.json", &eval)?;
        }
        None => eprintln!("note: no reference beats given, evaluation skipped"),
    }
    art.finish("fecg", cfg)?;
    Ok(())
}

pub fn embed(cfg: &EmbedConfig, out: &Path, opts: &ComputeOptions) -> Result<(), CliError> {
    let (Some(v1), Some(v2)) = (&cfg.view1, &cfg.view2) else {
        return Err(CliError::config("embed needs [embed] view1 and view2 paths"));
    };
    let x = read_matrix_csv(v1)?;
    let y = read_matrix_csv(v2)?;
    let r = embed_views(x.as_ref(), y.as_ref(), &cfg.embedding, opts)?;
    let mut art = Artifacts::new(out)?;
    write_embeddings(&mut art, &r)?;
    if r.degenerate {
        println!("difference embedding: degenerate: A ≈ 0");
    }
    art.finish("embed", cfg)?;
    Ok(())
}
