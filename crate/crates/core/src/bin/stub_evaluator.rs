//! Scriptable evaluator speaking the external evaluator protocol, for
//! exercising the engine's client without real training.
//!
//! Scores come from the synthetic landscape unless `--fitness` fixes them.
//! Faults are injected by request ordinal (1-based, counted across the whole
//! session): `--malformed-at N` answers request N with a non-JSON line,
//! `--drop-at N` never answers it, `--error-at N` sends an error response and
//! `--exit-after N` exits once N requests have been read. `--reverse` answers
//! each burst of requests in reverse order.

use std::io::{self, BufRead, Write};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use clap::Parser;

use graphpas::evaluation::protocol::{Request, Response};
use graphpas::{synthetic_fitness, SearchSpace};

#[derive(Parser)]
struct Args {
    #[arg(long)]
    fitness: Option<f64>,
    #[arg(long, default_value_t = 7)]
    synthetic_seed: u64,
    #[arg(long)]
    reverse: bool,
    #[arg(long)]
    malformed_at: Vec<u64>,
    #[arg(long)]
    drop_at: Vec<u64>,
    #[arg(long)]
    error_at: Vec<u64>,
    #[arg(long)]
    exit_after: Option<u64>,
    /// Idle time that ends a burst in `--reverse` mode.
    #[arg(long, default_value_t = 20)]
    burst_ms: u64,
}

fn main() {
    let args = Args::parse();
    let (tx, rx) = mpsc::channel::<String>();
    thread::spawn(move || {
        for line in io::stdin().lock().lines().map_while(Result::ok) {
            if tx.send(line).is_err() {
                break;
            }
        }
    });

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut space: Option<SearchSpace> = None;
    let mut seen: u64 = 0;

    loop {
        let Ok(first) = rx.recv() else { return };
        let mut burst = vec![first];
        if args.reverse {
            while let Ok(more) = rx.recv_timeout(Duration::from_millis(args.burst_ms)) {
                burst.push(more);
            }
            burst.reverse();
        }
        for line in burst {
            let reply = match serde_json::from_str::<Request>(&line) {
                Ok(Request::Init { layers, components }) => {
                    match SearchSpace::new(layers, components) {
                        Ok(s) => {
                            space = Some(s);
                            Some(Response::Ready.to_line())
                        }
                        Err(e) => Some(
                            Response::Error {
                                id: -1,
                                message: e.to_string(),
                            }
                            .to_line(),
                        ),
                    }
                }
                Ok(Request::Shutdown) => return,
                Ok(Request::Evaluate { id, architecture }) => {
                    seen += 1;
                    let ordinal = seen;
                    if args.drop_at.contains(&ordinal) {
                        None
                    } else if args.malformed_at.contains(&ordinal) {
                        Some(format!("this is not json (request {id})"))
                    } else if args.error_at.contains(&ordinal) {
                        Some(
                            Response::Error {
                                id: id as i64,
                                message: "injected failure".into(),
                            }
                            .to_line(),
                        )
                    } else {
                        Some(score(&space, id, &architecture, &args))
                    }
                }
                Err(e) => Some(
                    Response::Error {
                        id: -1,
                        message: format!("unparseable request: {e}"),
                    }
                    .to_line(),
                ),
            };
            if let Some(reply) = reply {
                if writeln!(out, "{reply}").and_then(|_| out.flush()).is_err() {
                    return;
                }
            }
            if args.exit_after.is_some_and(|n| seen >= n) {
                return;
            }
        }
    }
}

fn score(space: &Option<SearchSpace>, id: u64, architecture: &str, args: &Args) -> String {
    let Some(space) = space else {
        return Response::Error {
            id: id as i64,
            message: "evaluate before init".into(),
        }
        .to_line();
    };
    match space.decode(architecture) {
        Ok(arch) => Response::Result {
            id: id as i64,
            fitness: args
                .fitness
                .unwrap_or_else(|| synthetic_fitness(&arch, args.synthetic_seed)),
        }
        .to_line(),
        Err(e) => Response::Error {
            id: id as i64,
            message: e.to_string(),
        }
        .to_line(),
    }
}
