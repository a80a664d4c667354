//! Model completion providers: remote chat endpoints, recorded replays,
//! and scripted behaviors for tests and demos.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lang::Language;
use crate::problem::{Dataset, Prompt};

/// Sampling parameters forwarded to the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            temperature: 0.0,
            max_tokens: 2048,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    RemoteChat,
    Replay,
    Scripted,
}

/// Declarative provider configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    /// Chat endpoint URL (remote_chat).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the bearer credential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential: Option<String>,
    /// Replay fixture path (replay).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<PathBuf>,
    /// Model name sent to remote endpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Built-in scripted behavior name (scripted): `echo` or
    /// `fix_on_feedback`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<String>,
}

impl ProviderConfig {
    pub fn replay(fixture: impl Into<PathBuf>) -> ProviderConfig {
        ProviderConfig {
            kind: ProviderKind::Replay,
            endpoint: None,
            credential: None,
            fixture: Some(fixture.into()),
            model: None,
            script: None,
        }
    }

    pub fn scripted(script: impl Into<String>) -> ProviderConfig {
        ProviderConfig {
            kind: ProviderKind::Scripted,
            endpoint: None,
            credential: None,
            fixture: None,
            model: None,
            script: Some(script.into()),
        }
    }

    pub fn remote(endpoint: impl Into<String>, credential: impl Into<String>) -> ProviderConfig {
        ProviderConfig {
            kind: ProviderKind::RemoteChat,
            endpoint: Some(endpoint.into()),
            credential: Some(credential.into()),
            fixture: None,
            model: None,
            script: None,
        }
    }

    /// Instantiate the provider. `dataset` backs scripted behaviors that
    /// need problem lookups.
    pub fn build(&self, dataset: Option<&Dataset>) -> Result<Box<dyn Provider>> {
        match self.kind {
            ProviderKind::Replay => {
                let fixture = self
                    .fixture
                    .as_ref()
                    .ok_or_else(|| Error::Config("replay provider requires a fixture".into()))?;
                Ok(Box::new(ReplayProvider::load(fixture)?))
            }
            ProviderKind::RemoteChat => {
                let endpoint = self
                    .endpoint
                    .as_ref()
                    .ok_or_else(|| Error::Config("remote provider requires an endpoint".into()))?;
                let credential_var = self
                    .credential
                    .clone()
                    .unwrap_or_else(|| "MODEL_API_KEY".to_string());
                let token = std::env::var(&credential_var)
                    .map_err(|_| Error::CredentialMissing(credential_var.clone()))?;
                Ok(Box::new(RemoteChatProvider {
                    endpoint: endpoint.clone(),
                    token,
                    model: self.model.clone().unwrap_or_else(|| "default".to_string()),
                }))
            }
            ProviderKind::Scripted => {
                let script = self.script.as_deref().unwrap_or("echo");
                match script {
                    "echo" => Ok(Box::new(EchoProvider)),
                    "fix_on_feedback" => {
                        let dataset = dataset.ok_or_else(|| {
                            Error::Config(
                                "fix_on_feedback scripted provider requires a dataset".into(),
                            )
                        })?;
                        Ok(Box::new(FixOnFeedbackProvider {
                            dataset: dataset.clone(),
                        }))
                    }
                    other => Err(Error::Config(format!(
                        "unknown scripted behavior {other:?}"
                    ))),
                }
            }
        }
    }
}

/// A completion source.
pub trait Provider: Send + Sync {
    fn complete(&self, prompt: &Prompt, params: &SamplingParams) -> Result<String>;
}

/// Stable digest of a prompt: SHA-256 over the system text (empty when
/// absent), a NUL separator, and the user text; lowercase hex.
pub fn prompt_digest(prompt: &Prompt) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prompt.system_text.as_deref().unwrap_or("").as_bytes());
    hasher.update([0u8]);
    hasher.update(prompt.user_text.as_bytes());
    hex::encode(hasher.finalize())
}

/// Replays recorded responses from a JSON object mapping prompt digests
/// to response texts.
pub struct ReplayProvider {
    responses: HashMap<String, String>,
}

impl ReplayProvider {
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<ReplayProvider> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let responses: HashMap<String, String> = serde_json::from_str(&text)?;
        Ok(ReplayProvider { responses })
    }

    pub fn from_map(responses: HashMap<String, String>) -> ReplayProvider {
        ReplayProvider { responses }
    }
}

impl Provider for ReplayProvider {
    fn complete(&self, prompt: &Prompt, _params: &SamplingParams) -> Result<String> {
        let digest = prompt_digest(prompt);
        self.responses
            .get(&digest)
            .cloned()
            .ok_or(Error::FixtureMiss(digest))
    }
}

/// Echoes the user text back; useful for plumbing tests.
pub struct EchoProvider;

impl Provider for EchoProvider {
    fn complete(&self, prompt: &Prompt, _params: &SamplingParams) -> Result<String> {
        Ok(prompt.user_text.clone())
    }
}

/// Marker line the feedback template starts with; scripted providers key
/// off it to tell first attempts from repair rounds.
pub const FEEDBACK_MARKER: &str = "Your previous solution to the following problem failed.";

/// Returns deliberately broken code on a fresh prompt and the reference
/// solution once the prompt carries execution feedback. Demonstrates the
/// repair loop mechanically.
pub struct FixOnFeedbackProvider {
    dataset: Dataset,
}

impl FixOnFeedbackProvider {
    pub fn from_dataset(dataset: Dataset) -> FixOnFeedbackProvider {
        FixOnFeedbackProvider { dataset }
    }

    fn failing_stub(language: &Language) -> &'static str {
        match language {
            Language::Python => "raise RuntimeError(\"placeholder\")",
            Language::Cpp => "int placeholder_value = 1;",
            Language::JavaScript | Language::TypeScript => "throw new Error(\"placeholder\");",
            Language::Bash => "exit 1",
            Language::Perl => "die \"placeholder\";",
            Language::Rust => "pub fn placeholder() {}",
            _ => "placeholder",
        }
    }
}

impl Provider for FixOnFeedbackProvider {
    fn complete(&self, prompt: &Prompt, _params: &SamplingParams) -> Result<String> {
        let problem = self
            .dataset
            .problems()
            .iter()
            .find(|p| prompt.user_text.contains(&p.question))
            .ok_or_else(|| {
                Error::Provider("scripted provider cannot match the prompt to a problem".into())
            })?;
        let lang = problem.programming_language.name();
        let code = if prompt.user_text.starts_with(FEEDBACK_MARKER) {
            problem.reference_solution.clone()
        } else {
            Self::failing_stub(&problem.programming_language).to_string()
        };
        Ok(format!("```{lang}\n{code}\n```"))
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

/// Messages-based chat completion over HTTP with a bearer credential.
///
/// Request body: `{"model", "messages": [{"role": "system"?}, {"role":
/// "user"}], "temperature", "max_tokens"}`. The first choice's message
/// content is the completion. Transport failures retry with bounded
/// exponential backoff before surfacing an error.
pub struct RemoteChatProvider {
    endpoint: String,
    token: String,
    model: String,
}

const RETRY_ATTEMPTS: u32 = 3;
const RETRY_BASE_DELAY: Duration = Duration::from_millis(250);

impl Provider for RemoteChatProvider {
    fn complete(&self, prompt: &Prompt, params: &SamplingParams) -> Result<String> {
        let mut messages = Vec::new();
        if let Some(system) = &prompt.system_text {
            messages.push(ChatMessage {
                role: "system",
                content: system,
            });
        }
        messages.push(ChatMessage {
            role: "user",
            content: &prompt.user_text,
        });
        let body = ChatRequest {
            model: &self.model,
            messages,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
        };

        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::Provider(format!("http client: {e}")))?;

        let mut last_error = String::new();
        for attempt in 0..RETRY_ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(RETRY_BASE_DELAY * 2u32.pow(attempt - 1));
            }
            let sent = client
                .post(&self.endpoint)
                .bearer_auth(&self.token)
                .json(&body)
                .send();
            match sent {
                Ok(response) => {
                    let status = response.status();
                    if status.is_server_error() {
                        last_error = format!("server returned {status}");
                        continue;
                    }
                    if !status.is_success() {
                        return Err(Error::Provider(format!("endpoint returned {status}")));
                    }
                    let parsed: ChatResponse = response
                        .json()
                        .map_err(|e| Error::Provider(format!("malformed response: {e}")))?;
                    return parsed
                        .choices
                        .into_iter()
                        .next()
                        .map(|c| c.message.content)
                        .ok_or_else(|| Error::Provider("response has no choices".into()));
                }
                Err(e) => {
                    last_error = e.to_string();
                }
            }
        }
        Err(Error::Provider(format!(
            "transport failed after {RETRY_ATTEMPTS} attempts: {last_error}"
        )))
    }
}
