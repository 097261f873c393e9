use serde::Deserialize;
use serde_json::{json, Value};

use crate::model::BlobDigest;
use crate::store::{DetectionFilter, StoreError};

use super::Gateway;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
    Delete,
    Other,
}

impl Method {
    pub fn parse(s: &str) -> Self {
        match s {
            "GET" => Self::Get,
            "POST" => Self::Post,
            "DELETE" => Self::Delete,
            _ => Self::Other,
        }
    }
}

/// A decoded HTTP request, independent of any server framework.
#[derive(Debug, Clone)]
pub struct ApiRequest {
    pub method: Method,
    pub path: String,
    pub query: Vec<(String, String)>,
    pub body: Vec<u8>,
    pub now_ms: u64,
}

impl ApiRequest {
    pub fn new(method: Method, path: impl Into<String>) -> Self {
        Self {
            method,
            path: path.into(),
            query: Vec::new(),
            body: Vec::new(),
            now_ms: 0,
        }
    }

    pub fn get(path: impl Into<String>) -> Self {
        Self::new(Method::Get, path)
    }

    pub fn post(path: impl Into<String>, body: &Value) -> Self {
        Self {
            body: body.to_string().into_bytes(),
            ..Self::new(Method::Post, path)
        }
    }

    pub fn delete(path: impl Into<String>) -> Self {
        Self::new(Method::Delete, path)
    }

    pub fn with_query(mut self, key: &str, value: &str) -> Self {
        self.query.push((key.into(), value.into()));
        self
    }

    pub fn at(mut self, now_ms: u64) -> Self {
        self.now_ms = now_ms;
        self
    }

    /// Last value given for `key`.
    pub fn param(&self, key: &str) -> Option<&str> {
        self.query.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ApiBody {
    Json(Value),
    Bytes { content_type: &'static str, bytes: Vec<u8> },
    /// The caller should open a newline-delimited match stream starting
    /// after `since` events.
    EventStream { since: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiResponse {
    pub status: u16,
    pub body: ApiBody,
}

impl ApiResponse {
    pub fn json(status: u16, v: Value) -> Self {
        Self {
            status,
            body: ApiBody::Json(v),
        }
    }

    pub fn error(status: u16, msg: impl std::fmt::Display) -> Self {
        Self::json(status, json!({ "error": msg.to_string() }))
    }

    /// The JSON body, or `Null` for other bodies.
    pub fn json_body(&self) -> &Value {
        match &self.body {
            ApiBody::Json(v) => v,
            _ => &Value::Null,
        }
    }
}

fn store_error(e: StoreError) -> ApiResponse {
    let status = match e {
        StoreError::BadFilter(_) | StoreError::BadValue(_) => 400,
        StoreError::NotFound(_) | StoreError::UnknownEntry(_) => 404,
        StoreError::DuplicateEntry(_) => 409,
        StoreError::Corrupt(_) | StoreError::Io(_) | StoreError::Json(_) => 500,
    };
    ApiResponse::error(status, e)
}

#[derive(Deserialize)]
struct NewEntry {
    kind: String,
    value: Value,
    #[serde(default)]
    label: String,
}

fn parse_since(req: &ApiRequest) -> Result<usize, ApiResponse> {
    req.param("since")
        .map(|s| s.parse::<usize>().map_err(|_| ApiResponse::error(400, format!("bad since {s:?}"))))
        .transpose()
        .map(Option::unwrap_or_default)
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("api types serialize")
}

/// Dispatches one request against the gateway's stores and match hub.
pub fn serve_api(gw: &Gateway, req: &ApiRequest) -> ApiResponse {
    let Some(rest) = req.path.strip_prefix("/api/v1/") else {
        return ApiResponse::error(404, "no such endpoint");
    };
    let segs: Vec<&str> = rest.trim_end_matches('/').split('/').collect();
    let not_allowed = || ApiResponse::error(405, "method not allowed");
    let entry_id = |s: &str| s.parse::<u64>().map_err(|_| ApiResponse::error(400, format!("bad entry id {s:?}")));
    let result = match (segs.as_slice(), req.method) {
        (["watchlist"], Method::Get) => Ok(ApiResponse::json(200, to_json(&gw.stores.watchlist.list()))),
        (["watchlist"], Method::Post) => add_entry(gw, req),
        (["watchlist"], _) => Err(not_allowed()),
        (["watchlist", id], Method::Delete) => entry_id(id).and_then(|id| {
            gw.stores
                .watchlist
                .remove(id)
                .map(|e| ApiResponse::json(200, to_json(&e)))
                .map_err(store_error)
        }),
        (["watchlist", _], _) => Err(not_allowed()),
        (["watchlist", id, "rescan"], Method::Post) => entry_id(id).and_then(|id| {
            gw.rescan(id, req.now_ms)
                .map(|evs| ApiResponse::json(200, json!({ "entry_id": id, "new_matches": evs.len() })))
                .map_err(store_error)
        }),
        (["watchlist", _, "rescan"], _) => Err(not_allowed()),
        (["detections"], Method::Get) => DetectionFilter::parse(
            req.param("kind"),
            req.param("value"),
            req.param("from"),
            req.param("to"),
            req.param("bbox"),
        )
        .and_then(|f| gw.stores.detections.query_detections(&f))
        .map(|ds| ApiResponse::json(200, to_json(&ds)))
        .map_err(store_error),
        (["matches"], Method::Get) => parse_since(req).map(|s| ApiResponse::json(200, to_json(&gw.hub.since(s)))),
        (["events"], Method::Get) => parse_since(req).map(|since| ApiResponse {
            status: 200,
            body: ApiBody::EventStream { since },
        }),
        (["blobs", digest], Method::Get) => digest
            .parse::<BlobDigest>()
            .map_err(|_| ApiResponse::error(404, format!("blob {digest} not found")))
            .and_then(|d| gw.stores.blobs.get_blob(d).map_err(store_error))
            .map(|bytes| ApiResponse {
                status: 200,
                body: ApiBody::Bytes {
                    content_type: "image/png",
                    bytes,
                },
            }),
        (["metrics"], Method::Get) => Ok(ApiResponse::json(200, gw.metrics())),
        (["detections" | "matches" | "events" | "metrics"] | ["blobs", _], _) => Err(not_allowed()),
        _ => Err(ApiResponse::error(404, "no such endpoint")),
    };
    result.unwrap_or_else(|e| e)
}

fn add_entry(gw: &Gateway, req: &ApiRequest) -> Result<ApiResponse, ApiResponse> {
    let body: NewEntry = serde_json::from_slice(&req.body).map_err(|e| ApiResponse::error(400, format!("bad body: {e}")))?;
    gw.stores
        .watchlist
        .add_json(&body.kind, &body.value, &body.label, req.now_ms)
        .map(|id| ApiResponse::json(201, json!({ "entry_id": id })))
        .map_err(store_error)
}
