//! File formats, experiment pipelines and command-line plumbing on top of
//! [`tbm_core`].

pub mod fimi;
pub mod model_file;
pub mod pipeline;
pub mod report;

pub use fimi::{parse_fimi, parse_fimi_str, read_fimi, write_fimi, FimiError, FimiOptions};
pub use model_file::{LoadedModel, ModelFile, ModelFileError};
