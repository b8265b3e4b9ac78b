//! Messages of the external evaluator protocol: one JSON object per line on
//! the evaluator's stdin (requests) and stdout (responses).
//!
//! ```text
//! -> {"type":"init","layers":2,"components":[{"name":"att_1","values":["gat",...]},...]}
//! <- {"type":"ready"}
//! -> {"type":"evaluate","id":1,"architecture":"gat,sum,tanh,4,64;gcn,mean,elu,2,16"}
//! <- {"type":"result","id":1,"fitness":0.81}
//! <- {"type":"error","id":1,"message":"..."}
//! -> {"type":"shutdown"}
//! ```

use serde::{Deserialize, Serialize};

use crate::space::ComponentSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Request {
    Init {
        layers: usize,
        components: Vec<ComponentSpec>,
    },
    Evaluate {
        id: u64,
        architecture: String,
    },
    Shutdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Response {
    Ready,
    Result { id: i64, fitness: f64 },
    Error { id: i64, message: String },
}

impl Request {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("requests always serialize")
    }
}

impl Response {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("responses always serialize")
    }

    pub fn parse(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}
