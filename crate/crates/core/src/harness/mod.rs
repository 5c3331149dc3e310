//! The episode loop: prompts, chat providers, and tool execution.

mod episode;
mod message;
mod nshot;
mod prompt;
mod provider;
mod replay;
mod transcript;

pub use episode::{
    run_episode, CallRecord, RetryPolicy, RunConfig, RunSummary, Transcript, DEFAULT_MAX_TURNS, NUDGE,
    SHOT_COUNTS,
};
pub use message::{Message, Role};
pub use nshot::{nshot_examples, render_examples, NShotExample};
pub use prompt::{
    build_prompt, system_prompt, tool_listing, BASE_PROMPT, DATA_ONLY_PROMPT, NSHOT_HEADER,
    TOOL_LIST_HEADER, TOOL_USE_PROMPT,
};
pub use provider::{
    parse_response, request_body, response_body, ChatProvider, HttpChatProvider, ProviderConfig,
    ProviderError, RecordedRequest, ScriptedProvider,
};
pub use replay::OracleProvider;
pub use transcript::{read_transcripts, transcript_path, write_transcript};
