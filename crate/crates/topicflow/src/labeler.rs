//! Topic labeling against a chat-completion endpoint.

use std::thread;
use std::time::Duration;

use rayon::prelude::*;
use serde_json::{json, Value};
use topicflow_core::labeling::{
    fallback_label, label_topic, LabelError, LabelProvider, LabelRequest, LabelSource, PromptTemplate, ProviderError,
    RetryPolicy, TopicLabel,
};

use crate::config::LabelingSection;
use crate::error::{Error, Result};
use crate::providers::{agent, classify_status, transport_error};

/// Chat-completions URL; OpenAI's when unset.
pub const ENV_LLM_ENDPOINT: &str = "TOPICFLOW_LLM_ENDPOINT";
/// Bearer token for the completion endpoint.
pub const ENV_LLM_API_KEY: &str = "TOPICFLOW_LLM_API_KEY";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";

/// Sends the whole rendered prompt as a single user message.
pub struct ChatProvider {
    endpoint: String,
    api_key: Option<String>,
    model: String,
    temperature: f64,
    max_tokens: u32,
    agent: ureq::Agent,
}

impl ChatProvider {
    pub fn new(endpoint: &str, api_key: Option<String>, cfg: &LabelingSection) -> Self {
        ChatProvider {
            endpoint: endpoint.to_string(),
            api_key,
            model: cfg.model.clone(),
            temperature: cfg.temperature,
            max_tokens: cfg.max_tokens,
            agent: agent(Duration::from_secs(cfg.timeout_secs)),
        }
    }

    pub fn from_env(cfg: &LabelingSection) -> Result<Self> {
        let endpoint = std::env::var(ENV_LLM_ENDPOINT).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string());
        let key = std::env::var(ENV_LLM_API_KEY).ok().filter(|k| !k.is_empty());
        if key.is_none() && endpoint == DEFAULT_ENDPOINT {
            return Err(Error::Config(vec![format!("labeling.provider: live labeling needs {ENV_LLM_API_KEY}")]));
        }
        Ok(Self::new(&endpoint, key, cfg))
    }
}

impl LabelProvider for ChatProvider {
    fn id(&self) -> String {
        format!("chat:{}:{}", self.endpoint, self.model)
    }

    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        });
        let mut req = self.agent.post(&self.endpoint);
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {k}"));
        }
        let mut resp = req.send_json(&body).map_err(transport_error)?;
        let status = resp.status().as_u16();
        if status != 200 {
            let text = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(classify_status(status, &text));
        }
        let v: Value = resp.body_mut().read_json().map_err(transport_error)?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ProviderError::Fatal("response has no choices[0].message.content".into()))
    }
}

/// One topic to label.
#[derive(Debug, Clone)]
pub struct LabelJob {
    pub topic_id: usize,
    pub top_terms: Vec<String>,
    pub documents: Vec<String>,
}

/// Labels every job with at most `concurrency` requests in flight.
/// Output follows job order. An authentication failure aborts the batch.
pub fn label_all<P: LabelProvider + Sync + ?Sized>(
    provider: &P,
    template: &PromptTemplate,
    jobs: &[LabelJob],
    policy: &RetryPolicy,
    concurrency: usize,
) -> Result<Vec<TopicLabel>> {
    let one = |job: &LabelJob| -> Result<TopicLabel, LabelError> {
        match LabelRequest::new(job.topic_id, job.top_terms.clone(), job.documents.clone()) {
            Ok(req) => label_topic(provider, job.topic_id, &req.render(template), &job.top_terms, policy, thread::sleep),
            Err(e) => Ok(TopicLabel {
                topic_id: job.topic_id,
                label: fallback_label(&job.top_terms),
                source: LabelSource::Fallback,
                retries: 0,
                error: Some(e.to_string()),
            }),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(concurrency.max(1))
        .build()
        .map_err(|e| Error::Pipeline(e.to_string()))?;
    let out: Result<Vec<TopicLabel>, LabelError> = pool.install(|| jobs.par_iter().map(one).collect());
    Ok(out?)
}
