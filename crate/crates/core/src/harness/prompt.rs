//! System prompt assembly.

use super::nshot::{nshot_examples, render_examples};
use super::{Message, RunConfig};
use crate::tools::{schema, ToolMode, ToolSpec};
use crate::wb_data::DataContext;

pub const BASE_PROMPT: &str = "You are a helpful assistant tasked with answering questions that require multiple intermediate steps of reasoning to arrive at a final answer.
The questions involve using World Bank data for various countries and indicators.
The question cannot be answered in a single step, so you must break it down into smaller tasks, and use the results of each step to inform the next step.
Create a step-by-step plan to answer the question, and then execute each step of that plan to arrive at the final answer.
If you need to, take the time to think through the problem and plan your approach before acting.
To help me parse your answer, only provide the answer itself (e.g., the number, list, string, or boolean value) as your answer. Do not include any additional text or explanations. Do not perform any rounding or formatting of the answer.";

pub const TOOL_USE_PROMPT: &str = "You have access to a set of tools to help you answer the question:
Pay attention to the tool names, arguments, descriptions, and the types of outputs they return, and think carefully about how to use them to solve the problem.
If there is a tool available that can help you with the next step, you must use it rather than trying to solve the problem without it.
Do not format tool calls inside message content, instead, create them as dedicated tool calls in the `tool_calls` field of the message.
I will execute tool calls that you provide. You can use multiple tools in one step, but make sure you follow the correct format.
Use the results of each tool call to inform your next step. **Passing tool calls as arguments to other tool calls is not allowed.** Instead, execute each tool call separately and use the results to perform subsequent calls -- I will not execute nested tool calls.
If a tool call fails, use the error message to help you debug the issue, re-plan, and try again if possible.
Only provide the answer itself (e.g., the number, list, string, or boolean value) as your answer. Do not include any additional text or explanations. Do not perform any rounding or formatting of the answer.
***You must create a `final_answer` tool call to return your final answer - I will not be able to parse your answer from message content.**";

pub const TOOL_LIST_HEADER: &str = "The tools you have access to are below:";

pub const DATA_ONLY_PROMPT: &str = "These tools allow you to access World Bank indicators and retrieve data for specific countries, indicators, and years. Use them to fetch relevant data to answer the question.
However, you must **perform any necessary arithmetic manually**, without tool support for computation. If the answer requires calculations (e.g., summation, averages), you must compute these yourself based on the retrieved data.";

pub const NSHOT_HEADER: &str = "Examples of tool calls and their outputs:";

pub fn tool_listing(specs: &[ToolSpec]) -> String {
    specs.iter().map(ToolSpec::signature).collect::<Vec<_>>().join("\n")
}

/// The system prompt for `mode`, with an optional example block.
pub fn system_prompt(mode: ToolMode, examples: Option<&str>) -> String {
    let mut parts = vec![
        BASE_PROMPT.to_string(),
        TOOL_USE_PROMPT.to_string(),
        format!("{TOOL_LIST_HEADER}\n{}", tool_listing(&schema(mode))),
    ];
    if mode == ToolMode::DataOnly {
        parts.push(DATA_ONLY_PROMPT.to_string());
    }
    if let Some(block) = examples.filter(|b| !b.is_empty()) {
        parts.push(format!("{NSHOT_HEADER}\n{block}"));
    }
    parts.join("\n\n")
}

/// System message and user question that open an episode.
pub fn build_prompt(config: &RunConfig, question: &str, ctx: &DataContext) -> Vec<Message> {
    let examples = (config.n_shot > 0).then(|| {
        render_examples(&nshot_examples(&schema(config.tool_mode), config.n_shot, config.seed, ctx))
    });
    vec![
        Message::system(system_prompt(config.tool_mode, examples.as_deref())),
        Message::user(question),
    ]
}
