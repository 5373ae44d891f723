use hida_core::ErrorClass;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Core(hida_core::Error),
    /// Payload failed to parse or validate.
    Payload(String),
    /// Flags are missing or contradictory.
    Usage(String),
    Io(String),
}

impl From<hida_core::Error> for CliError {
    fn from(e: hida_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: &'a str,
    class: &'a str,
    exit_code: i32,
    message: String,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Domain => EXIT_DOMAIN,
                ErrorClass::Numerical => EXIT_NUMERICAL,
            },
            CliError::Payload(_) | CliError::Usage(_) => EXIT_DOMAIN,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Core(e) => {
                let dbg = format!("{e:?}");
                dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_owned()
            }
            CliError::Payload(_) => "InvalidPayload".into(),
            CliError::Usage(_) => "Usage".into(),
            CliError::Io(_) => "Io".into(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Payload(m) => format!("invalid payload: {m}"),
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
        }
    }

    /// One JSON line for stderr.
    pub fn diagnostic(&self) -> String {
        let code = self.exit_code();
        let class = match code {
            EXIT_DOMAIN => "domain",
            EXIT_NUMERICAL => "numerical",
            _ => "io",
        };
        let kind = self.kind();
        serde_json::to_string(&Diagnostic {
            error: &kind,
            class,
            exit_code: code,
            message: self.message(),
        })
        .expect("diagnostic serializes")
    }
}
