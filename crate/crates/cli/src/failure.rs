use std::fmt;

/// Command failure, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad settings or missing inputs, caught before any stage runs.
    Validation(anyhow::Error),
    /// A pipeline stage failed.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(e) => write!(f, "invalid configuration: {e:#}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

pub type CmdResult<T> = Result<T, Failure>;

pub fn invalid(msg: impl fmt::Display) -> Failure {
    Failure::Validation(anyhow::anyhow!("{msg}"))
}

/// Tags errors from a pipeline stage with the stage name.
pub trait StageExt<T> {
    fn stage(self, name: &str) -> CmdResult<T>;
}

impl<T, E> StageExt<T> for Result<T, E>
where
    E: Into<anyhow::Error>,
{
    fn stage(self, name: &str) -> CmdResult<T> {
        self.map_err(|e| Failure::Runtime(e.into().context(name.to_string())))
    }
}
