use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolCategory {
    Retrieval,
    Arithmetic,
    Utility,
}

/// Semantic argument type; also drives the JSON-schema export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamType {
    Number,
    Integer,
    String,
    NumberList,
    /// List of arbitrary scalars (nulls allowed where the tool tolerates them).
    ValueList,
    /// A string or a list of strings.
    Keywords,
    Any,
}

impl ParamType {
    pub fn label(self) -> &'static str {
        match self {
            ParamType::Number => "number",
            ParamType::Integer => "integer",
            ParamType::String => "string",
            ParamType::NumberList => "list[number]",
            ParamType::ValueList => "list",
            ParamType::Keywords => "string | list[string]",
            ParamType::Any => "any",
        }
    }

    fn json_schema(self, description: &str) -> Value {
        let mut s = match self {
            ParamType::Number => json!({"type": "number"}),
            ParamType::Integer => json!({"type": "integer"}),
            ParamType::String => json!({"type": "string"}),
            ParamType::NumberList => json!({"type": "array", "items": {"type": "number"}}),
            ParamType::ValueList => json!({"type": "array", "items": {}}),
            ParamType::Keywords => json!({"anyOf": [
                {"type": "string"},
                {"type": "array", "items": {"type": "string"}}
            ]}),
            ParamType::Any => json!({}),
        };
        s["description"] = Value::from(description);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub kind: ParamType,
    pub description: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub category: ToolCategory,
    pub params: Vec<ParamSpec>,
}

impl ToolSpec {
    /// Function declaration in the chat-completion wire schema.
    pub fn to_function_declaration(&self) -> Value {
        let mut props = Map::new();
        for p in &self.params {
            props.insert(p.name.to_string(), p.kind.json_schema(p.description));
        }
        let required: Vec<&str> = self.params.iter().map(|p| p.name).collect();
        json!({
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": props,
                    "required": required,
                }
            }
        })
    }

    /// One-line signature plus argument descriptions, for system prompts.
    pub fn signature(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|p| format!("{}: {}", p.name, p.kind.label()))
            .collect();
        let mut out = format!("- {}({}): {}", self.name, params.join(", "), self.description);
        for p in &self.params {
            out.push_str(&format!("\n    {}: {}", p.name, p.description));
        }
        out
    }
}

fn p(name: &'static str, kind: ParamType, description: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        description,
    }
}

fn tool(
    name: &'static str,
    category: ToolCategory,
    description: &'static str,
    params: Vec<ParamSpec>,
) -> ToolSpec {
    ToolSpec {
        name,
        description,
        category,
        params,
    }
}

const A: &str = "The first number.";
const B: &str = "The second number.";

/// All 22 tools in table order: retrieval, arithmetic, utility.
pub fn all_specs() -> Vec<ToolSpec> {
    use ParamType::*;
    use ToolCategory::*;
    vec![
        tool("search_for_indicator_names", Retrieval,
            "Retrieve indicator names and descriptions that match the given keywords.",
            vec![p("keywords", Keywords, "A list of keywords or a string to search for.")]),
        tool("get_country_code_from_name", Retrieval,
            "Get the three-letter country code from a country name.",
            vec![p("country_name", String, "The name of the country to get the code for.")]),
        tool("get_country_name_from_code", Retrieval,
            "Get the country name from a three-letter country code.",
            vec![p("country_code", String, "The three-letter country code to get the name for.")]),
        tool("get_indicator_code_from_name", Retrieval,
            "Get the indicator code from an indicator name.",
            vec![p("indicator_name", String, "The name of the indicator to get the code for.")]),
        tool("get_indicator_name_from_code", Retrieval,
            "Get the indicator name from an indicator code.",
            vec![p("indicator_code", String, "The code of the indicator to get the name for.")]),
        tool("get_country_codes_in_region", Retrieval,
            "Get the list of country codes in a given region.",
            vec![p("region", String, "The region to get the countries for.")]),
        tool("retrieve_value", Retrieval,
            "Return the value of an indicator for a country at a given year.",
            vec![
                p("country_code", String, "The three-letter country code"),
                p("indicator_code", String, "The indicator code"),
                p("year", Integer, "The year to look up."),
            ]),
        tool("add", Arithmetic, "Add a list of numbers.",
            vec![p("values", NumberList, "A list of numbers to add.")]),
        tool("subtract", Arithmetic, "Subtract value_b from value_a.",
            vec![p("value_a", Number, A), p("value_b", Number, B)]),
        tool("greater_than", Arithmetic, "Check if value_a is greater than value_b.",
            vec![p("value_a", Number, A), p("value_b", Number, B)]),
        tool("less_than", Arithmetic, "Check if value_a is less than value_b.",
            vec![p("value_a", Number, A), p("value_b", Number, B)]),
        tool("multiply", Arithmetic, "Multiply a list of numbers.",
            vec![p("values", NumberList, "A list of numbers to multiply.")]),
        tool("divide", Arithmetic, "Divide two numbers.",
            vec![p("value_a", Number, A), p("value_b", Number, B)]),
        tool("mean", Arithmetic, "Calculate the mean of a list of numbers.",
            vec![p("values", NumberList, "A list of numbers to calculate the mean for.")]),
        tool("maximum", Arithmetic, "Return the maximum of a list of numbers.",
            vec![p("values", NumberList, "A list of numbers.")]),
        tool("minimum", Arithmetic, "Return the minimum of a list of numbers.",
            vec![p("values", NumberList, "A list of numbers.")]),
        tool("count", Arithmetic, "Count the number of non-None elements in a list.",
            vec![p("values", ValueList, "A list of values to count.")]),
        tool("rank", Arithmetic,
            "Return the 1-based rank of query_value in values sorted descending.",
            vec![
                p("values", NumberList, "A list of numbers."),
                p("query_value", Number, "The value whose rank is to be determined."),
            ]),
        tool("sort", Arithmetic, "Sort a list of numbers.",
            vec![p("values", NumberList, "The list of numbers to sort.")]),
        tool("index", Arithmetic, "Return the 0-based index of query_value in values.",
            vec![
                p("values", ValueList, "List of values."),
                p("query_value", Any, "The value to find the index for."),
            ]),
        tool("think", Utility, "Record a thought or plan for the next step.",
            vec![p("thought", String, "A string describing your plan or reasoning.")]),
        tool("final_answer", Utility, "Submit your final answer.",
            vec![p("answer", Any, "The answer to the question.")]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn table_shape() {
        let specs = all_specs();
        assert_eq!(specs.len(), 22);
        let names: HashSet<_> = specs.iter().map(|s| s.name).collect();
        assert_eq!(names.len(), 22);
        let count = |c| specs.iter().filter(|s| s.category == c).count();
        assert_eq!(count(ToolCategory::Retrieval), 7);
        assert_eq!(count(ToolCategory::Arithmetic), 13);
        assert_eq!(count(ToolCategory::Utility), 2);
    }

    #[test]
    fn function_declaration_shape() {
        let decl = all_specs()[6].to_function_declaration();
        assert_eq!(decl["function"]["name"], "retrieve_value");
        assert_eq!(decl["function"]["parameters"]["properties"]["year"]["type"], "integer");
        assert_eq!(decl["function"]["parameters"]["required"].as_array().unwrap().len(), 3);
    }
}
