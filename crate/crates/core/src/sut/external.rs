use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use crate::automata::{Alphabet, Word};

use super::{Outcome, Sut, SutError};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

struct Session {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
}

/// A system driven over a line protocol on the child's stdin and stdout.
///
/// ```text
/// > RESET            < OK
/// > RUN a b c        < PASS | FAIL | INVALID
/// > RESET            < OK
/// ```
///
/// The handshake is one `RESET` right after spawning. Every response must
/// arrive within the timeout.
pub struct ExternalSut {
    alphabet: Alphabet,
    timeout: Duration,
    session: Mutex<Session>,
}

impl ExternalSut {
    pub fn spawn(
        mut command: Command,
        alphabet: Alphabet,
        timeout: Duration,
    ) -> Result<Self, SutError> {
        let mut child = command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| SutError::Transport(format!("cannot start system: {e}")))?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let sut = ExternalSut {
            alphabet,
            timeout,
            session: Mutex::new(Session {
                child,
                stdin,
                lines: rx,
            }),
        };
        {
            let mut session = sut.lock();
            sut.exchange(&mut session, "RESET", &["OK"])?;
        }
        Ok(sut)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn exchange(
        &self,
        session: &mut Session,
        request: &str,
        expected: &[&str],
    ) -> Result<String, SutError> {
        let transport = |m: String| SutError::Transport(m);
        writeln!(session.stdin, "{request}")
            .and_then(|_| session.stdin.flush())
            .map_err(|e| transport(format!("write `{request}`: {e}")))?;
        let line = match session.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(transport(format!("read after `{request}`: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                return Err(transport(format!(
                    "no response to `{request}` within {:?}",
                    self.timeout
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(transport(format!(
                    "system closed its output after `{request}`"
                )))
            }
        };
        let reply = line.trim().to_string();
        if expected.contains(&reply.as_str()) {
            Ok(reply)
        } else {
            Err(transport(format!(
                "unexpected response `{reply}` to `{request}`, wanted one of {expected:?}"
            )))
        }
    }
}

impl Sut for ExternalSut {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn execute(&self, word: &Word) -> Result<Outcome, SutError> {
        self.alphabet.check_word(word)?;
        let mut session = self.lock();
        let letters = self.alphabet.render_raw(word);
        let request = if letters.is_empty() {
            "RUN".to_string()
        } else {
            format!("RUN {letters}")
        };
        let reply = self.exchange(&mut session, &request, &["PASS", "FAIL", "INVALID"])?;
        self.exchange(&mut session, "RESET", &["OK"])?;
        Ok(match reply.as_str() {
            "PASS" => Outcome::Passed,
            "FAIL" => Outcome::Failed,
            _ => Outcome::Invalid,
        })
    }
}

impl Drop for ExternalSut {
    fn drop(&mut self) {
        let session = self.session.get_mut().unwrap_or_else(|e| e.into_inner());
        let _ = session.child.kill();
        let _ = session.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    // Two-letter example as a shell script: fails on words starting with "0 0" or
    // "1" followed by (1x)* then 0, invalid outside 00Σ* + 1Σ*.
    const EXAMPLE_SCRIPT: &str = r#"
while read cmd rest; do
  case "$cmd" in
    RESET) echo OK ;;
    RUN)
      w=$(echo "$rest" | tr -d ' ')
      case "$w" in
        00*) echo FAIL ;;
        1*)
          t=${w#1}; out=PASS
          while [ -n "$t" ]; do
            case "$t" in 0*) out=FAIL; break ;; esac
            t=${t#?}; t=${t#?}
          done
          echo $out ;;
        *) echo INVALID ;;
      esac ;;
  esac
done
"#;

    fn script(body: &str) -> Command {
        let mut c = Command::new("sh");
        c.arg("-c").arg(body);
        c
    }

    #[test]
    fn agrees_with_simulation() {
        let ex = fixtures::two_letter();
        let sim = super::super::SimulatedSut::new(ex.s.clone(), ex.b.clone()).unwrap();
        let ext = ExternalSut::spawn(script(EXAMPLE_SCRIPT), fixtures::binary(), DEFAULT_TIMEOUT)
            .unwrap();
        for w in Word::all_up_to(&fixtures::binary(), 5) {
            assert_eq!(ext.execute(&w).unwrap(), sim.execute(&w).unwrap());
        }
    }

    #[test]
    fn timeout_is_a_transport_error() {
        let body = "read cmd; echo OK; read cmd; sleep 5";
        let ext = ExternalSut::spawn(script(body), fixtures::binary(), Duration::from_millis(200))
            .unwrap();
        let w = fixtures::binary().word("1").unwrap();
        assert!(matches!(ext.execute(&w), Err(SutError::Transport(_))));
    }

    #[test]
    fn bad_handshake_and_garbage() {
        assert!(matches!(
            ExternalSut::spawn(
                script("read cmd; echo NOPE"),
                fixtures::binary(),
                DEFAULT_TIMEOUT
            ),
            Err(SutError::Transport(_))
        ));
        let ext = ExternalSut::spawn(
            script("read cmd; echo OK; read cmd; echo MAYBE"),
            fixtures::binary(),
            DEFAULT_TIMEOUT,
        )
        .unwrap();
        let w = fixtures::binary().word("1").unwrap();
        assert!(matches!(ext.execute(&w), Err(SutError::Transport(_))));
    }
}
