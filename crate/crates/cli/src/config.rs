use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every setting that can change a numeric output, written verbatim into
/// each output file so a run can be reproduced from any of its files.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    entries: BTreeMap<&'static str, String>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        let mut c = RunConfig::default();
        c.set("command", command);
        c
    }

    pub fn set(&mut self, key: &'static str, value: impl ToString) -> &mut Self {
        self.entries.insert(key, value.to_string());
        self
    }

    /// `# onelevel <version> key=value ...`
    pub fn header(&self) -> String {
        let mut s = format!("# onelevel {VERSION}");
        for (k, v) in &self.entries {
            let _ = write!(s, " {k}={v}");
        }
        s
    }
}
