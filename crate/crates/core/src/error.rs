use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module of the toolkit.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(u32, u32),

    #[error("unsupported sample rate: {0} Hz (processing runs at 16 kHz)")]
    UnsupportedSampleRate(u32),

    #[error("unsupported WAV format: {0}")]
    UnsupportedWavFormat(String),

    #[error("decay curve never reaches -35 dB; RIR too short or too dry for a T30 fit")]
    InsufficientDecayRange,

    #[error("word-error rate undefined: reference contains no words (S={substitutions} D={deletions} I={insertions})")]
    UndefinedRate {
        substitutions: usize,
        deletions: usize,
        insertions: usize,
    },

    #[error("no word received a rule-1 or rule-3 speaker label; nothing to anchor nearest-word attribution")]
    Unattributable,

    #[error("meeting sets differ between system and baseline: {0}")]
    MismatchedMeetings(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("ASR backend failure: {0}")]
    AsrBackend(String),

    #[error("WAV error: {0}")]
    Wav(#[from] hound::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
