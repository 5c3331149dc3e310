//! Slot specifications and surface forms. The first form of each template is
//! the canonical wording; the others are authored paraphrases.

use super::{AnswerType, OperatorStyle, QuestionTemplate, SlotKind, TemplateId};
use AnswerType::*;
use OperatorStyle::*;
use SlotKind::*;

const P: (&str, SlotKind) = ("property", Property);
const S: (&str, SlotKind) = ("subject", Subject);
const R: (&str, SlotKind) = ("region", Region);
const Y: (&str, SlotKind) = ("year", Year);
const OP: (&str, SlotKind) = ("operator", Operator);
const YA: (&str, SlotKind) = ("year_a", Year);
const YB: (&str, SlotKind) = ("year_b", Year);

fn t(
    id: TemplateId,
    slots: &'static [(&'static str, SlotKind)],
    forms: &'static [&'static str],
    answer_type: AnswerType,
    operator_style: Option<OperatorStyle>,
) -> QuestionTemplate {
    QuestionTemplate {
        id,
        slots,
        forms,
        answer_type,
        operator_style,
    }
}

pub fn template(id: TemplateId) -> QuestionTemplate {
    use TemplateId as T;
    match id {
        T::AverageChange => t(id, &[P, S, YA, YB], &[
            "What was the average yearly change in <property> for <subject> between <year_a> and <year_b>?",
            "On average, by how much did the <property> of <subject> change per year between <year_a> and <year_b>?",
            "What was the mean annual change in <property> for <subject> from <year_a> to <year_b>?",
        ], Number, None),
        T::AverageProperty => t(id, &[P, R, Y], &[
            "What was the average value of <property> in <region> in <year>?",
            "In <year>, what was the mean <property> across the countries of <region>?",
            "Across countries in <region>, what was the average <property> in <year>?",
        ], Number, None),
        T::AveragePropertyComparison => t(id, &[P, S, OP, R, Y], &[
            "Was the <property> of <subject> <operator> than the average value for <region> in <year>?",
            "In <year>, was the <property> of <subject> <operator> than the <region> average?",
        ], Boolean, Some(Comparative)),
        T::CountryPropertyComparison => t(id, &[("subject_a", Subject), OP, P, YA, ("subject_b", Subject), YB], &[
            "Did <subject_a> have a <operator> <property> in <year_a> than <subject_b> had in <year_b>?",
            "Was the <property> of <subject_a> in <year_a> <operator> than that of <subject_b> in <year_b>?",
        ], Boolean, Some(Comparative)),
        T::CountryThresholdCount => t(id, &[R, OP, P, S, Y], &[
            "How many countries in <region> had a <operator> <property> than <subject> in <year>?",
            "In <year>, how many countries in <region> had a <property> <operator> than that of <subject>?",
            "Compared with <subject>, how many countries in <region> had a <operator> <property> in <year>?",
        ], Integer, Some(Comparative)),
        T::PropertyOfSubject => t(id, &[P, S, Y], &[
            "What was the value of <property> for <subject> in <year>?",
            "What was the <property> of <subject> in <year>?",
            "In <year>, what was the <property> for <subject>?",
        ], Number, None),
        T::PropertyRatioComparison => t(id, &[P, ("subject_a", Subject), ("subject_b", Subject), Y, OP, ("threshold", Threshold)], &[
            "Was the ratio of <property> for <subject_a> to <subject_b> in <year> <operator> than <threshold>?",
            "In <year>, was the <property> of <subject_a> divided by that of <subject_b> <operator> than <threshold>?",
        ], Boolean, Some(Comparative)),
        T::RankChange => t(id, &[S, P, R, YA, YB], &[
            "Did the rank of <subject> in <property> in <region> change between <year_a> and <year_b>?",
            "Between <year_a> and <year_b>, did the ranking of <subject> within <region> for <property> change?",
        ], Boolean, None),
        T::RegionAverageComparison => t(id, &[("region_a", Region), OP, P, ("region_b", Region), Y], &[
            "Did <region_a> have a <operator> average <property> than <region_b> in <year>?",
            "In <year>, was the average <property> in <region_a> <operator> than in <region_b>?",
        ], Boolean, Some(Comparative)),
        T::RegionComparison => t(id, &[R, OP, P, Y], &[
            "Which country in the region of <region> had the <operator> <property> in <year>?",
            "In <year>, which country in <region> had the <operator> <property>?",
            "Which country in <region> recorded the <operator> <property> in <year>?",
        ], String, Some(Superlative)),
        T::RegionComparisonResult => t(id, &[R, OP, P, ("year_2", Year), ("year_1", Year)], &[
            "For the country in <region> that had the <operator> <property> in <year_2>, what was its value in <year_1>?",
            "Take the country in <region> with the <operator> <property> in <year_2>. What was its <property> in <year_1>?",
        ], Number, Some(Superlative)),
        T::RegionPropertyChange => t(id, &[R, OP, P, YA, YB], &[
            "Which country in <region> had the <operator> change in <property> between <year_a> and <year_b>?",
            "Between <year_a> and <year_b>, which country in <region> saw the <operator> change in <property>?",
        ], String, Some(Superlative)),
        T::RegionPropertyRatio => t(id, &[P, R, Y], &[
            "What was the ratio of the highest to the lowest <property> values in <region> in <year>?",
            "In <year>, what was the ratio between the highest and lowest <property> among countries in <region>?",
        ], Number, None),
        T::RegionProportion => t(id, &[P, R, Y, S], &[
            "What proportion of the total <property> in <region> in <year> was contributed by <subject>?",
            "What share of the total <property> of <region> in <year> came from <subject>?",
            "In <year>, what fraction of the total <property> in <region> did <subject> account for?",
        ], Number, None),
        T::RegionProportionChange => t(id, &[S, P, R, OP, YA, YB], &[
            "Was the share of <subject> in the total <property> in <region> <operator> in <year_a> than it was in <year_b>?",
            "Did <subject> account for a <operator> share of the total <property> in <region> in <year_a> than in <year_b>?",
        ], Boolean, Some(Comparative)),
        T::RegionRangeComparison => t(id, &[("region_a", Region), OP, P, ("region_b", Region), Y], &[
            "Did <region_a> have a <operator> range of values for <property> than <region_b> in <year>?",
            "In <year>, was the range of <property> across <region_a> <operator> than across <region_b>?",
        ], Boolean, Some(Comparative)),
        T::SubjectPropertyChange => t(id, &[S, OP, P, YA, YB], &[
            "Did <subject> have a <operator> change in <property> between <year_a> and <year_b>?",
            "Between <year_a> and <year_b>, was the change in the <property> of <subject> <operator>?",
        ], Boolean, Some(Sign)),
        T::SubjectPropertyRank => t(id, &[S, P, R, Y], &[
            "What was the rank of <subject> in <property> in <region> in <year>?",
            "In <year>, where did <subject> rank within <region> for <property>?",
            "Within <region>, what rank did <subject> hold for <property> in <year>?",
        ], Integer, None),
        T::TopNTotal => t(id, &[("n", N), R, OP, P, Y], &[
            "Which <n> countries in <region> had the <operator> total <property> in <year>?",
            "In <year>, which <n> countries in <region> had the <operator> <property>?",
        ], ListOfStrings, Some(Superlative)),
        T::TotalProperty => t(id, &[P, R, Y], &[
            "What was the total value of <property> in <region> in <year>?",
            "What was the combined <property> of all countries in <region> in <year>?",
            "In <year>, what was the sum of <property> across <region>?",
        ], Number, None),
    }
}
