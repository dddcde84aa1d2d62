//! Append-only run log inside the output directory.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use aigpt_core::{Error, Result};

pub const RUN_LOG: &str = "run.log";

pub struct RunLog {
    file: Mutex<File>,
}

impl RunLog {
    pub fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(RunLog { file: Mutex::new(file) })
    }

    fn write(&self, level: log::Level, msg: &str) {
        log::log!(level, "{msg}");
        let mut f = self.file.lock().expect("run log lock");
        // a failed log write must not abort the run
        let _ = writeln!(f, "{level:<5} {msg}");
    }

    pub fn info(&self, msg: &str) {
        self.write(log::Level::Info, msg);
    }

    pub fn warn(&self, msg: &str) {
        self.write(log::Level::Warn, msg);
    }

    pub fn error(&self, msg: &str) {
        self.write(log::Level::Error, msg);
    }
}
