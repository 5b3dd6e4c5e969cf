use alloc::string::String;

/// Errors produced by the estimation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite sample at channel {channel}, index {index}")]
    NonFiniteSample { channel: usize, index: usize },

    #[error("channel index {index} out of range for {channels} channels")]
    ChannelOutOfRange { index: usize, channels: usize },

    #[error("frequency {0} is not on the estimate grid")]
    FrequencyNotOnGrid(f64),

    #[error("kernel `{name}` rejected: {reason}")]
    KernelRejected { name: String, reason: String },

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    QuadratureNotConverged { estimate: f64 },

    #[error("no candidate exponent stabilizes for kernel `{0}`")]
    NoCharacteristicExponent(String),

    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),

    #[error("replicate {index}: {source}")]
    Replicate {
        index: u64,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
