//! Wire adapter for external planners: newline-delimited JSON over TCP.
//!
//! Protocol, one JSON object per line, one response per request:
//!   -> {"op":"hello"}
//!   <- {"id":"<planner id>"}
//!   -> {"op":"queries","instruction":..,"digest":..,"memory":[..],"k":n}
//!   <- {"queries":["..."]}
//!   -> {"op":"rerank","instruction":..,"digest":..,"cards":[..],"memory":[..]}
//!   <- {"decision":"skill","skill":"<id>"} | {"decision":"done"} | {"decision":"fail"}
//!   -> {"op":"configure","skill":..,"instruction":..,"digest":..,"memory":[..]}
//!   <- {"binding":{"skill_id":..,"values":{..}}}
//!   -> {"op":"summarize","skill":..,"binding":{..},"status":..,"detail":..}
//!   <- {"summary":"..."}
//!   any <- {"error":"<reason>"}
//!
//! The wire carries decisions, not state: observations travel as digests,
//! memory as its newest records, and skills by id, so the server resolves
//! specs against its own library copy. A transport or protocol failure
//! mid-episode records a fault and degrades to safe answers (no queries,
//! `fail`, empty binding, default summary), so a dead peer ends the
//! episode instead of crashing it.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::time::Duration;

use crate::args::{instantiate, ArgumentBinding, ConfiguredSkill};
use crate::env::Observation;
use crate::executor::{ExecutionOutcome, OutcomeStatus};
use crate::sim::UiState;
use crate::skill::{SkillLibrary, SkillSpec};

use super::{default_summary, EpisodeMemory, MemoryRecord, Planner, PlannerChoice, SkillCard};

const IO_TIMEOUT: Duration = Duration::from_secs(10);

/// Newest memory records shipped per request.
const MEMORY_TAIL: usize = 8;

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum Request {
    Hello,
    Queries {
        instruction: String,
        digest: String,
        memory: Vec<MemoryRecord>,
        k: usize,
    },
    Rerank {
        instruction: String,
        digest: String,
        cards: Vec<SkillCard>,
        memory: Vec<MemoryRecord>,
    },
    Configure {
        skill: String,
        instruction: String,
        digest: String,
        memory: Vec<MemoryRecord>,
    },
    Summarize {
        skill: String,
        binding: ArgumentBinding,
        status: String,
        detail: String,
    },
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
enum Response {
    Hello { id: String },
    Queries { queries: Vec<String> },
    Decision {
        decision: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        skill: Option<String>,
    },
    Binding { binding: ArgumentBinding },
    Summary { summary: String },
    Error { error: String },
}

#[derive(Debug, thiserror::Error)]
pub enum PlannerWireError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("malformed reply: {0}")]
    Malformed(String),
    #[error("peer error: {0}")]
    Remote(String),
}

/// Client side: a `Planner` backed by a remote peer.
pub struct WirePlanner {
    endpoint: String,
    id: String,
    conn: Option<BufReader<TcpStream>>,
    fault: Option<String>,
}

impl std::fmt::Debug for WirePlanner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WirePlanner")
            .field("endpoint", &self.endpoint)
            .field("id", &self.id)
            .field("fault", &self.fault)
            .finish_non_exhaustive()
    }
}

impl WirePlanner {
    /// Connect and handshake; fails fast when the peer is unreachable.
    pub fn connect(endpoint: &str) -> Result<Self, PlannerWireError> {
        let mut conn = open(endpoint)?;
        match roundtrip(&mut conn, &Request::Hello)? {
            Response::Hello { id } => Ok(WirePlanner {
                endpoint: endpoint.to_string(),
                id,
                conn: Some(conn),
                fault: None,
            }),
            Response::Error { error } => Err(PlannerWireError::Remote(error)),
            _ => Err(PlannerWireError::Malformed(
                "hello answered with a non-handshake reply".to_string(),
            )),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// First wire failure observed mid-episode, if any.
    pub fn fault(&self) -> Option<&str> {
        self.fault.as_deref()
    }

    fn call(&mut self, request: &Request) -> Result<Response, PlannerWireError> {
        if self.conn.is_none() {
            self.conn = Some(open(&self.endpoint)?);
        }
        let conn = self.conn.as_mut().expect("connection just ensured");
        match roundtrip(conn, request) {
            Ok(r) => Ok(r),
            Err(PlannerWireError::Transport(_)) => {
                // One reconnect attempt per call covers a peer that closed
                // an idle connection.
                self.conn = Some(open(&self.endpoint)?);
                roundtrip(self.conn.as_mut().unwrap(), request)
            }
            Err(e) => Err(e),
        }
    }

    /// Run the request; on failure record the fault and return `None`.
    fn try_call(&mut self, request: &Request) -> Option<Response> {
        match self.call(request) {
            Ok(Response::Error { error }) => {
                self.fault.get_or_insert(error);
                None
            }
            Ok(response) => Some(response),
            Err(e) => {
                self.fault.get_or_insert(e.to_string());
                None
            }
        }
    }
}

fn tail(memory: &EpisodeMemory) -> Vec<MemoryRecord> {
    let records = memory.records();
    records[records.len().saturating_sub(MEMORY_TAIL)..].to_vec()
}

fn open(endpoint: &str) -> Result<BufReader<TcpStream>, PlannerWireError> {
    let stream =
        TcpStream::connect(endpoint).map_err(|e| PlannerWireError::Transport(e.to_string()))?;
    stream
        .set_read_timeout(Some(IO_TIMEOUT))
        .and_then(|_| stream.set_write_timeout(Some(IO_TIMEOUT)))
        .map_err(|e| PlannerWireError::Transport(e.to_string()))?;
    Ok(BufReader::new(stream))
}

fn roundtrip(
    conn: &mut BufReader<TcpStream>,
    request: &Request,
) -> Result<Response, PlannerWireError> {
    let mut line = serde_json::to_string(request).expect("request serializes");
    line.push('\n');
    conn.get_mut()
        .write_all(line.as_bytes())
        .map_err(|e| PlannerWireError::Transport(e.to_string()))?;
    let mut reply = String::new();
    let n = conn
        .read_line(&mut reply)
        .map_err(|e| PlannerWireError::Transport(e.to_string()))?;
    if n == 0 {
        return Err(PlannerWireError::Transport(
            "peer closed the connection".to_string(),
        ));
    }
    serde_json::from_str(reply.trim_end()).map_err(|e| PlannerWireError::Malformed(e.to_string()))
}

impl Planner for WirePlanner {
    fn generate_queries(
        &mut self,
        instruction: &str,
        obs: &Observation,
        memory: &EpisodeMemory,
        k: usize,
    ) -> Vec<String> {
        let request = Request::Queries {
            instruction: instruction.to_string(),
            digest: obs.digest.clone(),
            memory: tail(memory),
            k,
        };
        match self.try_call(&request) {
            Some(Response::Queries { queries }) => queries,
            _ => Vec::new(),
        }
    }

    fn rerank(
        &mut self,
        candidates: &[SkillCard],
        obs: &Observation,
        memory: &EpisodeMemory,
    ) -> PlannerChoice {
        let request = Request::Rerank {
            instruction: memory.instruction().to_string(),
            digest: obs.digest.clone(),
            cards: candidates.to_vec(),
            memory: tail(memory),
        };
        match self.try_call(&request) {
            Some(Response::Decision { decision, skill }) => match decision.as_str() {
                "skill" => match skill {
                    Some(id) => PlannerChoice::Skill(id),
                    None => {
                        self.fault
                            .get_or_insert("skill decision without a skill id".to_string());
                        PlannerChoice::Fail
                    }
                },
                "done" => PlannerChoice::Done,
                _ => PlannerChoice::Fail,
            },
            _ => PlannerChoice::Fail,
        }
    }

    fn configure(
        &mut self,
        skill: &SkillSpec,
        obs: &Observation,
        memory: &EpisodeMemory,
    ) -> ArgumentBinding {
        let request = Request::Configure {
            skill: skill.id.clone(),
            instruction: memory.instruction().to_string(),
            digest: obs.digest.clone(),
            memory: tail(memory),
        };
        match self.try_call(&request) {
            Some(Response::Binding { binding }) => binding,
            _ => ArgumentBinding::new(&skill.id),
        }
    }

    fn summarize(&mut self, skill: &ConfiguredSkill, outcome: &ExecutionOutcome) -> String {
        let request = Request::Summarize {
            skill: skill.spec.id.clone(),
            binding: skill.binding.clone(),
            status: outcome.status.as_str().to_string(),
            detail: outcome.detail.clone(),
        };
        match self.try_call(&request) {
            Some(Response::Summary { summary }) => summary,
            _ => default_summary(skill, outcome),
        }
    }
}

/// Server side: answer wire requests by driving a local planner, resolving
/// skill ids against `lib`, until `max_connections` peers have
/// disconnected. Observations arrive as digests only, so the served
/// planner sees an empty UI state; planners that inspect state must run
/// client-side. Returns the number of requests served.
pub fn serve_planner(
    listener: TcpListener,
    lib: &SkillLibrary,
    planner: &mut dyn Planner,
    max_connections: usize,
) -> std::io::Result<usize> {
    let mut served = 0;
    for _ in 0..max_connections {
        let (stream, _) = listener.accept()?;
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut stream = stream;
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            let response = match serde_json::from_str::<Request>(line.trim_end()) {
                Ok(request) => answer(lib, planner, request),
                Err(e) => Response::Error {
                    error: format!("bad request: {e}"),
                },
            };
            let mut reply = serde_json::to_string(&response).expect("response serializes");
            reply.push('\n');
            stream.write_all(reply.as_bytes())?;
            served += 1;
        }
    }
    Ok(served)
}

fn answer(lib: &SkillLibrary, planner: &mut dyn Planner, request: Request) -> Response {
    let observation = |digest: String| Observation {
        state: UiState::default(),
        digest,
    };
    match request {
        Request::Hello => Response::Hello {
            id: "served-planner".to_string(),
        },
        Request::Queries {
            instruction,
            digest,
            memory,
            k,
        } => {
            let memory = EpisodeMemory::from_parts(instruction.clone(), memory);
            let queries =
                planner.generate_queries(&instruction, &observation(digest), &memory, k);
            Response::Queries { queries }
        }
        Request::Rerank {
            instruction,
            digest,
            cards,
            memory,
        } => {
            let memory = EpisodeMemory::from_parts(instruction, memory);
            match planner.rerank(&cards, &observation(digest), &memory) {
                PlannerChoice::Skill(id) => Response::Decision {
                    decision: "skill".to_string(),
                    skill: Some(id),
                },
                PlannerChoice::Done => Response::Decision {
                    decision: "done".to_string(),
                    skill: None,
                },
                PlannerChoice::Fail => Response::Decision {
                    decision: "fail".to_string(),
                    skill: None,
                },
            }
        }
        Request::Configure {
            skill,
            instruction,
            digest,
            memory,
        } => match lib.skill(&skill) {
            None => Response::Error {
                error: format!("unknown skill `{skill}`"),
            },
            Some(spec) => {
                let memory = EpisodeMemory::from_parts(instruction, memory);
                let binding = planner.configure(spec, &observation(digest), &memory);
                Response::Binding { binding }
            }
        },
        Request::Summarize {
            skill,
            binding,
            status,
            detail,
        } => {
            let Some(spec) = lib.skill(&skill) else {
                return Response::Error {
                    error: format!("unknown skill `{skill}`"),
                };
            };
            let Some(status) = OutcomeStatus::parse(&status) else {
                return Response::Error {
                    error: format!("unknown outcome status `{status}`"),
                };
            };
            match instantiate(spec, &binding) {
                Err(e) => Response::Error {
                    error: format!("binding rejected: {e}"),
                },
                Ok(configured) => {
                    let outcome = ExecutionOutcome { status, detail };
                    let summary = planner.summarize(&configured, &outcome);
                    Response::Summary { summary }
                }
            }
        }
    }
}
