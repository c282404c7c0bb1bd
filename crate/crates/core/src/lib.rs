//! Remove-and-inpaint attacks that strip hidden images out of containers.
//!
//! The crate is organised bottom-up:
//!
//! - [`image`]: the normalized raster type, PNG IO, padding and the
//!   distortion filters shared by attacks and baselines.
//! - [`hiding`]: exactly invertible local hiding schemes (LSB and
//!   neighborhood-spread) plus the locality / redundancy probes.
//! - [`inpaint`]: the inpainter contract, zero-fill and harmonic diffusion
//!   inpainters, Canny edges, distorted-region side input, and an external
//!   process adapter.
//! - [`removal`]: grid partitioning, box removal, the single-cell and
//!   residue-phase schedulers, the attack driver and the noise/blur baselines.
//! - [`metrics`]: RMSE, PSNR and pixel-domain VIF.
//! - [`theory`]: bound arithmetic and empirical attack certification.
//! - [`synth`]: procedural textured test images.

pub mod error;
pub mod hiding;
pub mod image;
pub mod inpaint;
pub mod metrics;
pub mod removal;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use hiding::HidingScheme;
pub use image::{ImageBuf, PadInfo};
pub use inpaint::{
    DiffusionInpainter, EdgeMap, ExternalInpainter, InpaintRequest, Inpainter, InpainterKind,
    ZeroFill,
};
pub use metrics::{Distance, MetricRecord};
pub use removal::{Attack, AttackConfig, AttackMode, Cell, RegionGrid, RemovalMask};
pub use theory::Certificate;
