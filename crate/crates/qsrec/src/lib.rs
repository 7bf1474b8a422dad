//! Quarter-sampling video simulation and recursive frequency selective
//! reconstruction.
//!
//! A quarter-sampling sensor measures one pixel of every 2x2 block per
//! frame, yielding non-regular sub-sampling at 25% density. This crate
//! simulates such sensors (fixed masks and period-4 dynamic masks), rebuilds
//! full frames with block-wise frequency selective reconstruction (FSR), and
//! improves video reconstructions recursively: pixel-wise template matching
//! against up to three reconstructed past frames, motion-vector consistency
//! checking, and motion-compensated projection of past measurements into the
//! current frame.
//!
//! Four consistency checks are available: full reverse motion estimation
//! (RME), the reverse motion check on a full offset grid (RMC), its fast
//! variant on a sparse offset set (FRMC), and the matching-free nearest
//! neighbor check (NNC), used as a cascade with FRMC. Two recursive variants
//! differ in how projected pixels enter the output: `rfsr` overwrites the
//! model with them, `dfsr` uses them only to support model generation.
//!
//! # Modules
//!
//! - [`frame_io`]: frames, masks, PGM sequences on disk
//! - [`mask`]: quarter-sampling mask generation and sensor simulation
//! - [`fsr`]: block-wise sparse spectral model generation and reconstruction
//! - [`motion`]: pixel-wise template matching
//! - [`consistency`]: RME / RMC / FRMC / NNC and the NNC+FRMC cascade
//! - [`projection`]: motion-compensated projection and averaging
//! - [`pipeline`]: the causal recursive reconstruction loop
//! - [`metrics`]: PSNR / SSIM with border exclusion
//! - [`config`], [`cli`]: run configuration, commands, reports
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example generate_masks
//! cargo run --release --example single_frame_fsr
//! cargo run --release --example motion_and_checks
//! cargo run --release --example recursive_reconstruction
//! cargo run --release --example evaluate_quality
//! cargo run --release --example cli_pipeline
//! ```
//!
//! The `qsrec` binary exposes the same flow as `mask`, `run`, and
//! `compare` subcommands; see the README.

pub mod cli;
pub mod config;
pub mod consistency;
pub mod error;
pub mod frame_io;
pub mod fsr;
pub mod mask;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod projection;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use frame_io::{Frame, Mask, SampledFrame};
