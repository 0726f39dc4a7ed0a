pub mod lang;
pub mod interp;
pub mod mutation;
pub mod metrics;
pub mod stats;
pub mod learn;
pub mod pipeline;
