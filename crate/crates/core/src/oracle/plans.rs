//! The twenty solution plans.
//!
//! Every plan starts by finding the indicator through search and resolving
//! its code. Comparisons are always `greater_than`, with the arguments
//! swapped for the `lowest` operator.

use super::{AnswerExpr, Arg, BindOp, Guard, OnMissing, SolutionPlan, Source, Step, ToolChoice};
use crate::templates::TemplateId;
use crate::tools::{COUNTRY_CODE, COUNTRY_NAME, INDICATOR_CODE, REGION_CODES, RETRIEVE, SEARCH};
use Arg::{Item, Lit, Prev, Slot, Var, Zip};
use OnMissing::{Drop, Fail};

type Args = Vec<(&'static str, Arg)>;

fn call(bind: &'static str, tool: &'static str, args: Args) -> Step {
    Step::Call {
        bind,
        tool: ToolChoice::Fixed(tool),
        args,
    }
}

fn call_op(bind: &'static str, highest: &'static str, lowest: &'static str, args: Args) -> Step {
    Step::Call {
        bind,
        tool: ToolChoice::ByOperator { highest, lowest },
        args,
    }
}

fn bind(bind: &'static str, op: BindOp) -> Step {
    Step::Bind { bind, op }
}

fn values(var: &'static str) -> Args {
    vec![("values", Var(var))]
}

fn pair(a: Arg, b: Arg) -> Args {
    vec![("value_a", a), ("value_b", b)]
}

/// `greater_than(a, b)` for `highest`, `greater_than(b, a)` for `lowest`.
fn compare(bind: &'static str, a: Arg, b: Arg) -> Step {
    call(
        bind,
        "greater_than",
        pair(Arg::by_op(a.clone(), b.clone()), Arg::by_op(b, a)),
    )
}

fn indicator() -> Vec<Step> {
    vec![
        call("hits", SEARCH, vec![("keywords", Arg::Keywords("property"))]),
        bind(
            "indicator_name",
            BindOp::IndicatorFromSearch {
                hits: "hits",
                property: "property",
            },
        ),
        call("indicator", INDICATOR_CODE, vec![("indicator_name", Var("indicator_name"))]),
    ]
}

fn country_code(bind: &'static str, slot: &'static str) -> Step {
    call(bind, COUNTRY_CODE, vec![("country_name", Slot(slot))])
}

fn region_codes(bind: &'static str, slot: &'static str) -> Step {
    call(bind, REGION_CODES, vec![("region", Slot(slot))])
}

fn retrieve(bind: &'static str, country: &'static str, year: &'static str) -> Step {
    call(
        bind,
        RETRIEVE,
        vec![
            ("country_code", Var(country)),
            ("indicator_code", Var("indicator")),
            ("year", Slot(year)),
        ],
    )
}

/// One retrieval per country in `codes`.
fn retrieve_all(bind: &'static str, codes: &'static str, year: &'static str, on_missing: OnMissing) -> Step {
    Step::Map {
        bind,
        over: Source::Var(codes),
        tool: ToolChoice::Fixed(RETRIEVE),
        args: vec![
            ("country_code", Item),
            ("indicator_code", Var("indicator")),
            ("year", Slot(year)),
        ],
        on_missing,
    }
}

/// Country code of the unique extreme entry of `vals`, bound to `out`.
fn extreme_country(out: &'static str, vals: &'static str) -> Vec<Step> {
    vec![
        call_op("extreme", "maximum", "minimum", values(vals)),
        Step::Guard(Guard::UniqueExtreme {
            list: vals,
            extreme: "extreme",
        }),
        call("position", "index", vec![("values", Var(vals)), ("query_value", Var("extreme"))]),
        bind(out, BindOp::At { list: vals, index: "position" }),
    ]
}

fn plan(template: TemplateId, groups: Vec<Vec<Step>>, answer: AnswerExpr) -> SolutionPlan {
    SolutionPlan {
        template,
        steps: groups.into_iter().flatten().collect(),
        answer,
    }
}

/// The registered plan for a template.
pub fn plan_for(id: TemplateId) -> SolutionPlan {
    use AnswerExpr::Var as Answer;
    use TemplateId as T;
    match id {
        T::AverageChange => plan(id, vec![
            indicator(),
            vec![
                country_code("subject_code", "subject"),
                Step::Map {
                    bind: "series",
                    over: Source::YearRange("year_a", "year_b"),
                    tool: ToolChoice::Fixed(RETRIEVE),
                    args: vec![
                        ("country_code", Var("subject_code")),
                        ("indicator_code", Var("indicator")),
                        ("year", Item),
                    ],
                    on_missing: Fail,
                },
                Step::Windows {
                    bind: "changes",
                    over: "series",
                    tool: ToolChoice::Fixed("subtract"),
                    args: pair(Item, Prev),
                },
                call("answer", "mean", values("changes")),
            ],
        ], Answer("answer")),

        T::AverageProperty => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes", "region"),
                retrieve_all("vals", "codes", "year", Drop),
                call("answer", "mean", values("vals")),
            ],
        ], Answer("answer")),

        T::AveragePropertyComparison => plan(id, vec![
            indicator(),
            vec![
                country_code("subject_code", "subject"),
                retrieve("subject_val", "subject_code", "year"),
                region_codes("codes", "region"),
                retrieve_all("vals", "codes", "year", Drop),
                call("avg", "mean", values("vals")),
                compare("answer", Var("subject_val"), Var("avg")),
            ],
        ], Answer("answer")),

        T::CountryPropertyComparison => plan(id, vec![
            indicator(),
            vec![
                country_code("code_a", "subject_a"),
                country_code("code_b", "subject_b"),
                retrieve("val_a", "code_a", "year_a"),
                retrieve("val_b", "code_b", "year_b"),
                compare("answer", Var("val_a"), Var("val_b")),
            ],
        ], Answer("answer")),

        T::CountryThresholdCount => plan(id, vec![
            indicator(),
            vec![
                country_code("subject_code", "subject"),
                retrieve("subject_val", "subject_code", "year"),
                region_codes("codes", "region"),
                bind("others", BindOp::Exclude { list: "codes", value: "subject_code" }),
                retrieve_all("vals", "others", "year", Fail),
                Step::Map {
                    bind: "beats",
                    over: Source::Var("vals"),
                    tool: ToolChoice::Fixed("greater_than"),
                    args: pair(
                        Arg::by_op(Item, Var("subject_val")),
                        Arg::by_op(Var("subject_val"), Item),
                    ),
                    on_missing: Fail,
                },
                bind("winners", BindOp::Filter { list: "vals", mask: "beats" }),
                call("answer", "count", values("winners")),
            ],
        ], Answer("answer")),

        T::PropertyOfSubject => plan(id, vec![
            indicator(),
            vec![
                country_code("subject_code", "subject"),
                retrieve("answer", "subject_code", "year"),
            ],
        ], Answer("answer")),

        T::PropertyRatioComparison => plan(id, vec![
            indicator(),
            vec![
                country_code("code_a", "subject_a"),
                country_code("code_b", "subject_b"),
                retrieve("val_a", "code_a", "year"),
                retrieve("val_b", "code_b", "year"),
                call("ratio", "divide", pair(Var("val_a"), Var("val_b"))),
                compare("answer", Var("ratio"), Slot("threshold")),
            ],
        ], Answer("answer")),

        T::RankChange => plan(id, vec![
            indicator(),
            vec![
                country_code("subject_code", "subject"),
                region_codes("codes", "region"),
                retrieve_all("vals_a", "codes", "year_a", Fail),
                retrieve_all("vals_b", "codes", "year_b", Fail),
                retrieve("subject_a", "subject_code", "year_a"),
                retrieve("subject_b", "subject_code", "year_b"),
                call("rank_a", "rank", vec![("values", Var("vals_a")), ("query_value", Var("subject_a"))]),
                call("rank_b", "rank", vec![("values", Var("vals_b")), ("query_value", Var("subject_b"))]),
            ],
        ], AnswerExpr::Differs("rank_a", "rank_b")),

        T::RegionAverageComparison => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes_a", "region_a"),
                retrieve_all("vals_a", "codes_a", "year", Drop),
                call("avg_a", "mean", values("vals_a")),
                region_codes("codes_b", "region_b"),
                retrieve_all("vals_b", "codes_b", "year", Drop),
                call("avg_b", "mean", values("vals_b")),
                compare("answer", Var("avg_a"), Var("avg_b")),
            ],
        ], Answer("answer")),

        T::RegionComparison => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes", "region"),
                retrieve_all("vals", "codes", "year", Fail),
            ],
            extreme_country("winner", "vals"),
            vec![call("answer", COUNTRY_NAME, vec![("country_code", Var("winner"))])],
        ], Answer("answer")),

        T::RegionComparisonResult => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes", "region"),
                retrieve_all("vals", "codes", "year_2", Fail),
            ],
            extreme_country("winner", "vals"),
            vec![retrieve("answer", "winner", "year_1")],
        ], Answer("answer")),

        T::RegionPropertyChange => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes", "region"),
                retrieve_all("vals_a", "codes", "year_a", Fail),
                retrieve_all("vals_b", "codes", "year_b", Fail),
                Step::Map {
                    bind: "changes",
                    over: Source::Var("vals_b"),
                    tool: ToolChoice::Fixed("subtract"),
                    args: pair(Item, Zip("vals_a")),
                    on_missing: Fail,
                },
            ],
            extreme_country("winner", "changes"),
            vec![call("answer", COUNTRY_NAME, vec![("country_code", Var("winner"))])],
        ], Answer("answer")),

        T::RegionPropertyRatio => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes", "region"),
                retrieve_all("vals", "codes", "year", Fail),
                call("high", "maximum", values("vals")),
                call("low", "minimum", values("vals")),
                call("answer", "divide", pair(Var("high"), Var("low"))),
            ],
        ], Answer("answer")),

        T::RegionProportion => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes", "region"),
                retrieve_all("vals", "codes", "year", Drop),
                call("total", "add", values("vals")),
                country_code("subject_code", "subject"),
                retrieve("subject_val", "subject_code", "year"),
                call("answer", "divide", pair(Var("subject_val"), Var("total"))),
            ],
        ], Answer("answer")),

        T::RegionProportionChange => plan(id, vec![
            indicator(),
            vec![
                country_code("subject_code", "subject"),
                region_codes("codes", "region"),
                retrieve_all("vals_a", "codes", "year_a", Drop),
                call("total_a", "add", values("vals_a")),
                retrieve("subject_a", "subject_code", "year_a"),
                call("share_a", "divide", pair(Var("subject_a"), Var("total_a"))),
                retrieve_all("vals_b", "codes", "year_b", Drop),
                call("total_b", "add", values("vals_b")),
                retrieve("subject_b", "subject_code", "year_b"),
                call("share_b", "divide", pair(Var("subject_b"), Var("total_b"))),
                compare("answer", Var("share_a"), Var("share_b")),
            ],
        ], Answer("answer")),

        T::RegionRangeComparison => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes_a", "region_a"),
                retrieve_all("vals_a", "codes_a", "year", Fail),
                call("max_a", "maximum", values("vals_a")),
                call("min_a", "minimum", values("vals_a")),
                call("range_a", "subtract", pair(Var("max_a"), Var("min_a"))),
                region_codes("codes_b", "region_b"),
                retrieve_all("vals_b", "codes_b", "year", Fail),
                call("max_b", "maximum", values("vals_b")),
                call("min_b", "minimum", values("vals_b")),
                call("range_b", "subtract", pair(Var("max_b"), Var("min_b"))),
                compare("answer", Var("range_a"), Var("range_b")),
            ],
        ], Answer("answer")),

        T::SubjectPropertyChange => plan(id, vec![
            indicator(),
            vec![
                country_code("subject_code", "subject"),
                retrieve("val_a", "subject_code", "year_a"),
                retrieve("val_b", "subject_code", "year_b"),
                call("change", "subtract", pair(Var("val_b"), Var("val_a"))),
                // positive: change > 0; negative: 0 > change
                compare("answer", Var("change"), Lit(0.0)),
            ],
        ], Answer("answer")),

        T::SubjectPropertyRank => plan(id, vec![
            indicator(),
            vec![
                country_code("subject_code", "subject"),
                region_codes("codes", "region"),
                retrieve_all("vals", "codes", "year", Fail),
                retrieve("subject_val", "subject_code", "year"),
                call("answer", "rank", vec![("values", Var("vals")), ("query_value", Var("subject_val"))]),
            ],
        ], Answer("answer")),

        T::TopNTotal => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes", "region"),
                retrieve_all("vals", "codes", "year", Fail),
                call("sorted", "sort", values("vals")),
                Step::Guard(Guard::DistinctBoundary { sorted: "sorted", n: "n" }),
                bind("top", BindOp::TopKeys { sorted: "sorted", list: "vals", n: "n" }),
                Step::Map {
                    bind: "answer",
                    over: Source::Var("top"),
                    tool: ToolChoice::Fixed(COUNTRY_NAME),
                    args: vec![("country_code", Item)],
                    on_missing: Fail,
                },
            ],
        ], Answer("answer")),

        T::TotalProperty => plan(id, vec![
            indicator(),
            vec![
                region_codes("codes", "region"),
                retrieve_all("vals", "codes", "year", Drop),
                call("answer", "add", values("vals")),
            ],
        ], Answer("answer")),
    }
}
