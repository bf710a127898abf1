//! HTTP report server: serves one generated report and takes ignore edits.

use std::fs::OpenOptions;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use anyhow::Context;
use auditboard_core::capture::{load_bundle, CaptureBundle, IssueCategory};
use auditboard_core::ignore::{IgnoreRecord, IgnoreStore, IgnoreTarget};
use auditboard_core::report::Report;
use auditboard_core::Error as CoreError;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Mutex;
use tower_http::services::ServeDir;

use crate::commands::{build_report, write_report, BUGS_FILE, BUNDLE_DIR, REPORT_FILE};

struct Shared {
    report_dir: PathBuf,
    bundle: CaptureBundle,
    report: RwLock<Arc<Report>>,
    /// Single writer for ignore edits and regeneration.
    store: Arc<Mutex<IgnoreStore>>,
    bugs: Mutex<()>,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    /// Loads `report.json` and the bundle copy from a report directory.
    pub fn load(report_dir: &Path, ignore_file: &Path) -> anyhow::Result<Self> {
        let path = report_dir.join(REPORT_FILE);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let report: Report = serde_json::from_str(&text).with_context(|| format!("corrupt report {}", path.display()))?;
        let bundle = load_bundle(&report_dir.join(BUNDLE_DIR)).context("loading the report's bundle copy")?;
        let store = IgnoreStore::open(ignore_file)?;
        Ok(AppState(Arc::new(Shared {
            report_dir: report_dir.to_path_buf(),
            bundle,
            report: RwLock::new(Arc::new(report)),
            store: Arc::new(Mutex::new(store)),
            bugs: Mutex::new(()),
        })))
    }

    pub fn report(&self) -> Arc<Report> {
        Arc::clone(&self.0.report.read().expect("report lock"))
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let status = match &e {
            CoreError::UnknownIgnore(_) | CoreError::UnknownDetection { .. } => StatusCode::NOT_FOUND,
            CoreError::InvalidIgnore(_) | CoreError::Config(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<CoreError>() {
            Ok(core) => core.into(),
            Err(e) => ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}")),
        }
    }
}

fn not_found(what: String) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, what)
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/report", get(get_report))
        .route("/api/screens/{file}", get(get_screen))
        .route("/api/ignores", get(list_ignores).post(add_ignore))
        .route("/api/ignores/{id}", delete(remove_ignore))
        .route("/api/regenerate", post(regenerate))
        .route("/api/bugs", post(file_bug))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { "auditboard report server; the report is at /api/report\n" })),
    }
}

async fn get_report(State(s): State<AppState>) -> Json<Arc<Report>> {
    Json(s.report())
}

async fn get_screen(State(s): State<AppState>, UrlPath(file): UrlPath<String>) -> ApiResult<Response> {
    let id = file.strip_suffix(".png").ok_or_else(|| not_found(format!("no screen {file}")))?;
    let report = s.report();
    let capture = report
        .captures
        .iter()
        .find(|c| c.capture_id == id)
        .ok_or_else(|| not_found(format!("no screen {id}")))?;
    let path = s.0.report_dir.join(&capture.screenshot);
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("reading {}: {e}", path.display())))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn list_ignores(State(s): State<AppState>) -> Json<Vec<IgnoreRecord>> {
    let store = s.0.store.lock().await;
    Json(store.list(&s.0.bundle.app_id).into_iter().cloned().collect())
}

/// Body of `POST /api/ignores`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "scope", rename_all = "snake_case")]
pub enum IgnoreRequest {
    Issue { unique_id: String },
    CheckName { check_name: String },
    Category { category: IssueCategory },
    Screen { group_id: u32 },
}

async fn add_ignore(State(s): State<AppState>, Json(req): Json<IgnoreRequest>) -> ApiResult<(StatusCode, Json<IgnoreRecord>)> {
    let report = s.report();
    let bundle = &s.0.bundle;
    let capture = |id: &str| bundle.capture(id).ok_or_else(|| not_found(format!("no capture {id}")));
    let mut store = s.0.store.lock().await;
    let rec = match &req {
        IgnoreRequest::Issue { unique_id } => {
            let u = report
                .unique_issue(unique_id)
                .ok_or_else(|| not_found(format!("no issue {unique_id}")))?;
            let detection_id = u.anchor.detection_id.as_deref().ok_or_else(|| {
                ApiError(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    format!("issue {unique_id} is not attached to an element; ignore its check or screen instead"),
                )
            })?;
            store.add(
                &bundle.app_id,
                IgnoreTarget::Issue {
                    capture: capture(&u.anchor.capture_id)?,
                    detection_id,
                    check_name: &u.check_name,
                },
            )?
        }
        IgnoreRequest::CheckName { check_name } => store.add(&bundle.app_id, IgnoreTarget::CheckName(check_name.clone()))?,
        IgnoreRequest::Category { category } => store.add(&bundle.app_id, IgnoreTarget::Category(*category))?,
        IgnoreRequest::Screen { group_id } => {
            let g = report
                .group(*group_id)
                .ok_or_else(|| not_found(format!("no screen group {group_id}")))?;
            store.add(&bundle.app_id, IgnoreTarget::Screen(capture(&g.representative_id)?))?
        }
    };
    Ok((StatusCode::CREATED, Json(rec)))
}

async fn remove_ignore(State(s): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<IgnoreRecord>> {
    let mut store = s.0.store.lock().await;
    Ok(Json(store.remove(&id)?))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RegenerateRequest {
    /// Re-group the screens too instead of reusing the storyboard.
    pub full: bool,
}

async fn regenerate(State(s): State<AppState>, body: Option<Json<RegenerateRequest>>) -> ApiResult<Json<Arc<Report>>> {
    let full = body.map(|Json(b)| b.full).unwrap_or(false);
    // Held across the rebuild so ignore edits land either before or after it.
    let store = Arc::clone(&s.0.store).lock_owned().await;
    let current = s.report();
    let shared = Arc::clone(&s.0);
    let report = tokio::task::spawn_blocking(move || -> anyhow::Result<Arc<Report>> {
        let storyboard = (!full).then_some(&current.storyboard);
        let report = build_report(&shared.bundle, &current.config, storyboard, &store, Utc::now())?;
        write_report(&report, &shared.report_dir)?;
        let report = Arc::new(report);
        // Swapped before the ignore lock is released.
        *shared.report.write().expect("report lock") = Arc::clone(&report);
        Ok(report)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(report))
}

/// Body of `POST /api/bugs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BugRequest {
    pub unique_id: String,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub note: Option<String>,
}

async fn file_bug(State(s): State<AppState>, Json(req): Json<BugRequest>) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let report = s.report();
    let u = report
        .unique_issue(&req.unique_id)
        .ok_or_else(|| not_found(format!("no issue {}", req.unique_id)))?;
    let _guard = s.0.bugs.lock().await;
    let path = s.0.report_dir.join(BUGS_FILE);
    let n = std::fs::read_to_string(&path).map(|t| t.lines().count()).unwrap_or(0);
    let bug = json!({
        "bug_id": format!("bug-{:06}", n + 1),
        "app_id": report.app_id,
        "run_id": report.run_id,
        "unique_id": u.unique_id,
        "category": u.category,
        "check_name": u.check_name,
        "capture_id": u.anchor.capture_id,
        "bbox": u.anchor.bbox,
        "occurrences": u.occurrences.len(),
        "title": req.title.clone().unwrap_or_else(|| format!("{}: {}", u.category, u.check_name)),
        "note": req.note,
        "created_at": Utc::now(),
    });
    let mut line = serde_json::to_string(&bug).map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    line.push('\n');
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .and_then(|mut f| f.write_all(line.as_bytes()))
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("writing {}: {e}", path.display())))?;
    Ok((StatusCode::CREATED, Json(bug)))
}

/// Serves `report_dir` until interrupted.
pub async fn cmd_serve(report_dir: &Path, ignore_file: &Path, port: u16, static_dir: Option<&Path>) -> anyhow::Result<()> {
    let state = AppState::load(report_dir, ignore_file)?;
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    eprintln!("serving {} on http://{}", report_dir.display(), listener.local_addr()?);
    axum::serve(listener, router(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
