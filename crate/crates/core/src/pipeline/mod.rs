//! File formats and whole-video orchestration.

mod estimate;
mod format;
mod tracings;

pub use estimate::{
    interpolate_gaps, run_estimate, write_volumes_csv, EstimateError, EstimateParams, EstimateReport, FrameReport,
    ReportParams, REPORT_SCHEMA_VERSION,
};
pub use format::{
    decode_mask_stack, encode_mask_stack, read_mask_stack, write_mask_stack, FormatError, MaskStack, HEADER_LEN,
    MAGIC, VERSION,
};
pub use tracings::{
    group_tracings, parse_tracings, read_tracings, tracing_polygon, tracings_to_masks, Segment, TracingError,
    TracingOptions, TracingRow,
};
