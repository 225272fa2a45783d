//! Iterative clip-factor search: enhance locally with CLAHE at a growing clip
//! factor, accepting each step only while the result keeps getting more
//! similar to its own globally equalized image, and stop at the first drop.

use std::fmt::Write as _;

use thiserror::Error;

use crate::clahe::{self, ClaheParams, ClipLimit, ParamError};
use crate::ghe;
use crate::image::GrayImage;
use crate::metrics::{Metric, MetricError, Similarity, SimilarityScorer};

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("initial clip factor {clip} must be at least 1")]
    InitialClipTooSmall { clip: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    /// Tiles per axis for the inner CLAHE calls.
    pub grid_size: u32,
    /// Clip factor tried on the first iteration; grows by 1 per accepted step.
    pub initial_clip_factor: u32,
    /// Similarity metric driving the accept/reject test.
    pub metric: Metric,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            grid_size: 8,
            initial_clip_factor: 3,
            metric: Metric::Ssim,
        }
    }
}

/// One candidate evaluation inside the search loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// Loop index, starting at 0.
    pub iteration: u32,
    /// Clip factor the candidate was built with.
    pub clip_factor: u32,
    /// Oriented similarity of the candidate to the current global reference.
    pub score: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// A candidate scored no better than the best so far.
    ScoreDrop,
    /// The `ts^2 - 1` iteration budget ran out.
    IterationCap,
}

/// Full record of one search run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// Name of the similarity measure that drove the run.
    pub metric: String,
    /// Similarity of the raw input to its own global equalization, the
    /// baseline every candidate must beat.
    pub initial_score: f64,
    pub records: Vec<IterationRecord>,
    /// Clip factor of the last accepted candidate (`initial - 1` if none).
    pub chosen_clip_factor: u32,
    /// Best score reached (the baseline if nothing was accepted).
    pub final_score: f64,
    pub termination: Termination,
}

/// Enhanced image plus the search bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub image: GrayImage,
    pub chosen_clip_factor: u32,
    pub trace: IterationTrace,
}

/// Run the search with the metric named in `params`.
pub fn run(image: &GrayImage, params: &SearchParams) -> Result<SearchOutcome, SearchError> {
    let scorer = SimilarityScorer::new(params.metric);
    run_with_scorer(image, params, &scorer)
}

/// Run the search with any similarity measure.
///
/// Starting from the input, each iteration re-equalizes the current result
/// globally as the reference, builds a CLAHE candidate from the current
/// result at the current clip factor, and accepts the candidate only if it
/// scores strictly higher than the best so far; on accept the clip factor
/// grows by one. Ties terminate. At most `ts^2 - 1` iterations run.
pub fn run_with_scorer<S: Similarity + ?Sized>(
    image: &GrayImage,
    params: &SearchParams,
    scorer: &S,
) -> Result<SearchOutcome, SearchError> {
    if params.initial_clip_factor < 1 {
        return Err(SearchError::InitialClipTooSmall {
            clip: params.initial_clip_factor,
        });
    }
    ClaheParams::new(
        params.grid_size,
        ClipLimit::Factor(params.initial_clip_factor as f64),
    )
    .validate(image)?;

    let mut enhanced = image.clone();
    let reference = ghe::equalize(&enhanced);
    let initial_score = scorer.score(&reference, &enhanced)?;

    let mut best_score = initial_score;
    let mut clip_factor = params.initial_clip_factor;
    let mut accepts = 0u32;
    let mut records = Vec::new();
    let mut termination = Termination::IterationCap;

    let budget = params.grid_size as u64 * params.grid_size as u64 - 1;
    let mut iteration = 0u64;
    while iteration < budget {
        let reference = ghe::equalize(&enhanced);
        let candidate = clahe::enhance(
            &enhanced,
            &ClaheParams::new(params.grid_size, ClipLimit::Factor(clip_factor as f64)),
        )?;
        let score = scorer.score(&reference, &candidate)?;
        let accepted = score > best_score;
        records.push(IterationRecord {
            iteration: iteration as u32,
            clip_factor,
            score,
            accepted,
        });
        if accepted {
            best_score = score;
            enhanced = candidate;
            clip_factor += 1;
            accepts += 1;
        } else {
            termination = Termination::ScoreDrop;
            break;
        }
        iteration += 1;
    }

    let chosen_clip_factor = params.initial_clip_factor + accepts - 1;
    let trace = IterationTrace {
        metric: scorer.name().to_string(),
        initial_score,
        records,
        chosen_clip_factor,
        final_score: best_score,
        termination,
    };
    Ok(SearchOutcome {
        image: enhanced,
        chosen_clip_factor,
        trace,
    })
}

/// Render a trace as a per-iteration table with a termination summary.
pub fn explain_trace(trace: &IterationTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4}  {:>11}  {:<6}  {:>18}  accepted",
        "iter", "clip factor", "metric", "score"
    );
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{:>4}  {:>11}  {:<6}  {:>18.12}  {}",
            r.iteration,
            r.clip_factor,
            trace.metric,
            r.score,
            if r.accepted { "yes" } else { "no" }
        );
    }
    if trace.records.is_empty() {
        let _ = writeln!(out, "(no iterations ran)");
    }
    let reason = match trace.termination {
        Termination::ScoreDrop => "similarity stopped improving",
        Termination::IterationCap => "iteration budget exhausted",
    };
    let _ = writeln!(
        out,
        "terminated at iteration {}: {}",
        trace.records.last().map_or(0, |r| r.iteration),
        reason
    );
    let _ = writeln!(
        out,
        "chosen clip factor {} (final {} score {:.12}, baseline {:.12})",
        trace.chosen_clip_factor, trace.metric, trace.final_score, trace.initial_score
    );
    out
}
