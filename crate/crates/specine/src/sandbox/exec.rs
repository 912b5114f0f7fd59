use std::io::Read;
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::core::TestCase;
use crate::sandbox::judge::judge_output;

/// Resource caps applied to every test execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionLimits {
    /// Wall-clock budget per test; the child is killed when it runs out.
    pub wall_timeout: Duration,
    /// Address-space cap in bytes.
    pub memory_limit: u64,
    /// Maximum bytes kept per stream; more than this is an overflow verdict.
    pub output_limit: u64,
}

impl Default for ExecutionLimits {
    fn default() -> Self {
        ExecutionLimits {
            wall_timeout: Duration::from_secs(10),
            memory_limit: 512 * 1024 * 1024,
            output_limit: 1024 * 1024,
        }
    }
}

/// How to run a candidate program: the interpreter command line (with a
/// `{file}` placeholder for the source path) and the file name to write the
/// code to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LangConfig {
    pub tag: String,
    pub command: Vec<String>,
    pub file_name: String,
}

impl LangConfig {
    pub fn python3() -> Self {
        LangConfig {
            tag: "python3".into(),
            command: vec!["python3".into(), "{file}".into()],
            file_name: "main.py".into(),
        }
    }

    pub fn shell() -> Self {
        LangConfig {
            tag: "sh".into(),
            command: vec!["sh".into(), "{file}".into()],
            file_name: "main.sh".into(),
        }
    }

    pub fn for_tag(tag: &str) -> Option<Self> {
        match tag {
            "python3" => Some(Self::python3()),
            "sh" => Some(Self::shell()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    WrongOutput,
    RuntimeError,
    Timeout,
    OutputOverflow,
    /// The interpreter could not be started at all; an environment problem,
    /// not a property of the code under test.
    SetupError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub verdict: Verdict,
    pub stdout: String,
    pub stderr: String,
    pub duration: Duration,
}

struct StreamCapture {
    kept: Vec<u8>,
    truncated: bool,
}

fn drain_stream(mut stream: impl Read, limit: usize) -> StreamCapture {
    let mut kept = Vec::new();
    let mut truncated = false;
    let mut buf = [0u8; 8192];
    loop {
        match stream.read(&mut buf) {
            Ok(0) | Err(_) => break,
            Ok(n) => {
                if kept.len() < limit {
                    let take = (limit - kept.len()).min(n);
                    kept.extend_from_slice(&buf[..take]);
                    if take < n {
                        truncated = true;
                    }
                } else {
                    truncated = true;
                }
            }
        }
    }
    StreamCapture { kept, truncated }
}

/// Runs one candidate against one test case.
///
/// The code is written into a private temporary directory and executed with
/// the test input on stdin, a minimal environment, and the given limits. The
/// child never outlives the call: on timeout it is killed and reaped. A
/// process that exits nonzero but printed the expected output still passes;
/// the exit status only decides between `WrongOutput` and `RuntimeError`
/// once the output comparison has failed.
pub fn run_one(code: &str, lang: &LangConfig, test: &TestCase, limits: &ExecutionLimits) -> ExecutionResult {
    let started = Instant::now();
    let setup_error = |detail: String| ExecutionResult {
        verdict: Verdict::SetupError,
        stdout: String::new(),
        stderr: detail,
        duration: started.elapsed(),
    };

    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return setup_error(format!("temp dir: {e}")),
    };
    let file = dir.path().join(&lang.file_name);
    if let Err(e) = std::fs::write(&file, code) {
        return setup_error(format!("write source: {e}"));
    }
    let file_str = file.to_string_lossy().into_owned();
    let argv: Vec<String> = lang
        .command
        .iter()
        .map(|part| part.replace("{file}", &file_str))
        .collect();
    if argv.is_empty() {
        return setup_error("empty interpreter command".into());
    }

    let mut command = Command::new(&argv[0]);
    command
        .args(&argv[1..])
        .current_dir(dir.path())
        .env_clear()
        .env("PATH", std::env::var("PATH").unwrap_or_else(|_| "/usr/bin:/bin".into()))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    apply_memory_limit(&mut command, limits.memory_limit);

    let mut child = match command.spawn() {
        Ok(c) => c,
        Err(e) => return setup_error(format!("spawn {}: {e}", argv[0])),
    };

    let limit = usize::try_from(limits.output_limit).unwrap_or(usize::MAX);
    let stdout_pipe = child.stdout.take().expect("stdout piped");
    let stderr_pipe = child.stderr.take().expect("stderr piped");
    let out_thread = std::thread::spawn(move || drain_stream(stdout_pipe, limit));
    let err_thread = std::thread::spawn(move || drain_stream(stderr_pipe, limit));

    let mut stdin_pipe = child.stdin.take().expect("stdin piped");
    let mut input = test.input.clone();
    if !input.is_empty() && !input.ends_with('\n') {
        input.push('\n');
    }
    let in_thread = std::thread::spawn(move || {
        let _ = stdin_pipe.write_all(input.as_bytes());
    });

    let mut timed_out = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {
                if started.elapsed() >= limits.wall_timeout {
                    timed_out = true;
                    let _ = child.kill();
                    break child.wait().ok();
                }
                std::thread::sleep(Duration::from_millis(1));
            }
            Err(_) => break child.wait().ok(),
        }
    };

    let stdout_cap = out_thread.join().unwrap_or(StreamCapture { kept: Vec::new(), truncated: false });
    let stderr_cap = err_thread.join().unwrap_or(StreamCapture { kept: Vec::new(), truncated: false });
    let _ = in_thread.join();

    let stdout = String::from_utf8_lossy(&stdout_cap.kept).into_owned();
    let stderr = String::from_utf8_lossy(&stderr_cap.kept).into_owned();
    let duration = started.elapsed();

    let verdict = if stdout_cap.truncated || stderr_cap.truncated {
        Verdict::OutputOverflow
    } else if timed_out {
        Verdict::Timeout
    } else if judge_output(&stdout, &test.expected) {
        Verdict::Pass
    } else if status.map(|s| !s.success()).unwrap_or(true) {
        Verdict::RuntimeError
    } else {
        Verdict::WrongOutput
    };

    ExecutionResult { verdict, stdout, stderr, duration }
}

#[cfg(unix)]
fn apply_memory_limit(command: &mut Command, bytes: u64) {
    use std::os::unix::process::CommandExt;
    let limit = libc::rlimit {
        rlim_cur: bytes as libc::rlim_t,
        rlim_max: bytes as libc::rlim_t,
    };
    unsafe {
        command.pre_exec(move || {
            if libc::setrlimit(libc::RLIMIT_AS, &limit) != 0 {
                return Err(std::io::Error::last_os_error());
            }
            Ok(())
        });
    }
}

#[cfg(not(unix))]
fn apply_memory_limit(_command: &mut Command, _bytes: u64) {}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_limits() -> ExecutionLimits {
        ExecutionLimits {
            wall_timeout: Duration::from_secs(5),
            ..ExecutionLimits::default()
        }
    }

    #[test]
    fn default_limits() {
        let limits = ExecutionLimits::default();
        assert_eq!(limits.wall_timeout, Duration::from_secs(10));
        assert_eq!(limits.memory_limit, 512 * 1024 * 1024);
        assert_eq!(limits.output_limit, 1024 * 1024);
    }

    #[test]
    fn passing_run() {
        let r = run_one(
            "read x\necho $((x * 2))",
            &LangConfig::shell(),
            &TestCase::public("21", "42"),
            &fast_limits(),
        );
        assert_eq!(r.verdict, Verdict::Pass, "stderr: {}", r.stderr);
    }

    #[test]
    fn wrong_output() {
        let r = run_one(
            "echo 7",
            &LangConfig::shell(),
            &TestCase::public("", "8"),
            &fast_limits(),
        );
        assert_eq!(r.verdict, Verdict::WrongOutput);
        assert_eq!(r.stdout, "7\n");
    }

    #[test]
    fn trailing_whitespace_still_passes() {
        let r = run_one(
            "printf 'ok  \\n\\n\\n'",
            &LangConfig::shell(),
            &TestCase::public("", "ok"),
            &fast_limits(),
        );
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn nonzero_exit_with_matching_output_passes() {
        let r = run_one(
            "echo 42\nexit 3",
            &LangConfig::shell(),
            &TestCase::public("", "42"),
            &fast_limits(),
        );
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn nonzero_exit_with_wrong_output_is_runtime_error() {
        let r = run_one(
            "echo oops >&2\nexit 1",
            &LangConfig::shell(),
            &TestCase::public("", "42"),
            &fast_limits(),
        );
        assert_eq!(r.verdict, Verdict::RuntimeError);
        assert!(r.stderr.contains("oops"));
    }

    #[test]
    fn timeout_kills_the_child() {
        let limits = ExecutionLimits {
            wall_timeout: Duration::from_millis(300),
            ..ExecutionLimits::default()
        };
        let started = Instant::now();
        let r = run_one(
            "while true; do :; done",
            &LangConfig::shell(),
            &TestCase::public("", "never"),
            &limits,
        );
        assert_eq!(r.verdict, Verdict::Timeout);
        assert!(started.elapsed() < Duration::from_secs(3));
    }

    #[test]
    fn output_overflow() {
        let limits = ExecutionLimits {
            output_limit: 1024,
            wall_timeout: Duration::from_secs(5),
            ..ExecutionLimits::default()
        };
        let r = run_one(
            "i=0\nwhile [ $i -lt 200 ]; do echo aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa; i=$((i + 1)); done",
            &LangConfig::shell(),
            &TestCase::public("", "x"),
            &limits,
        );
        assert_eq!(r.verdict, Verdict::OutputOverflow);
        assert!(r.stdout.len() <= 1024);
    }

    #[test]
    fn missing_interpreter_is_setup_error() {
        let lang = LangConfig {
            tag: "ghost".into(),
            command: vec!["definitely-not-installed-interp".into(), "{file}".into()],
            file_name: "main.x".into(),
        };
        let r = run_one("whatever", &lang, &TestCase::public("", ""), &fast_limits());
        assert_eq!(r.verdict, Verdict::SetupError);
        assert!(r.stderr.contains("spawn"));
    }

    #[test]
    fn memory_limit_is_enforced() {
        let r = run_one(
            "data = bytearray(800 * 1024 * 1024)\nprint(len(data))",
            &LangConfig::python3(),
            &TestCase::public("", "838860800"),
            &fast_limits(),
        );
        assert_eq!(r.verdict, Verdict::RuntimeError, "stdout: {}", r.stdout);
    }

    #[test]
    fn python_candidate_runs() {
        let r = run_one(
            "x = int(input())\nprint(x + 1)",
            &LangConfig::python3(),
            &TestCase::public("41", "42"),
            &fast_limits(),
        );
        assert_eq!(r.verdict, Verdict::Pass, "stderr: {}", r.stderr);
    }

    #[test]
    fn large_input_does_not_deadlock() {
        let big = "a".repeat(300_000);
        let r = run_one(
            "cat > /dev/null\necho done",
            &LangConfig::shell(),
            &TestCase::public(big, "done"),
            &fast_limits(),
        );
        assert_eq!(r.verdict, Verdict::Pass);
    }
}
