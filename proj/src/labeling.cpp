#include "biomlab/labeling.hpp"

#include <algorithm>

#include "biomlab/csv.hpp"

namespace biomlab::labeling {

const char* category_name(Category c) {
    switch (c) {
        case Category::SociallyLonely: return "socially_lonely";
        case Category::EmotionallyLonely: return "emotionally_lonely";
        case Category::BothLonely: return "both_lonely";
        case Category::NotLonely: return "not_lonely";
    }
    return "?";
}

Category category_from_name(const std::string& name) {
    for (int c = 0; c < kNumCategories; ++c) {
        if (name == category_name(static_cast<Category>(c))) return static_cast<Category>(c);
    }
    throw ValidationError("unknown loneliness category: " + name);
}

const std::array<ItemSpec, 10>& ucla_items() {
    static const std::array<ItemSpec, 10> items = {{
        {1, Subscale::Emotional, false},
        {2, Subscale::Emotional, true},
        {3, Subscale::Emotional, true},
        {4, Subscale::Emotional, true},
        {5, Subscale::Emotional, false},
        {6, Subscale::Social, true},
        {7, Subscale::Social, false},
        {8, Subscale::Social, false},
        {9, Subscale::Social, true},
        {10, Subscale::Social, false},
    }};
    return items;
}

Assessment score_ucla(const std::string& participant_id, const std::array<int, 10>& raw_responses) {
    Assessment a;
    a.participant_id = participant_id;
    a.responses = raw_responses;
    for (const auto& item : ucla_items()) {
        const int raw = raw_responses[static_cast<std::size_t>(item.item_id - 1)];
        if (raw < 1 || raw > 4) {
            throw ValidationError("response for item " + std::to_string(item.item_id) +
                                  " outside 1..4 for participant " + participant_id);
        }
        const int value = item.reverse_scored ? 5 - raw : raw;
        if (item.subscale == Subscale::Social) {
            a.social_score += value;
        } else {
            a.emotional_score += value;
        }
    }
    a.total_score = a.social_score + a.emotional_score;
    a.category = categorize(a.social_score, a.emotional_score);
    a.overall_high = overall_binary_high(a.total_score);
    return a;
}

Category categorize(int social_score, int emotional_score) {
    const bool social = social_score > 10;
    const bool emotional = emotional_score > 10;
    if (social && !emotional) return Category::SociallyLonely;
    if (!social && emotional) return Category::EmotionallyLonely;
    if (social && emotional) return Category::BothLonely;
    return Category::NotLonely;
}

bool overall_binary_high(int total_score) { return total_score > 20; }

namespace {

ScoreStats stats_of(const std::vector<double>& xs) {
    ScoreStats s;
    s.mean = mean_of(xs);
    s.median = quantile(xs, 0.5);
    s.q1 = quantile(xs, 0.25);
    s.q3 = quantile(xs, 0.75);
    s.sd = population_stddev(xs);
    return s;
}

}  // namespace

CohortSummary cohort_summary(const std::vector<Assessment>& assessments) {
    if (assessments.empty()) throw ValidationError("cohort_summary requires at least one assessment");
    CohortSummary out;
    out.n = assessments.size();
    std::vector<double> total, social, emotional;
    total.reserve(out.n);
    social.reserve(out.n);
    emotional.reserve(out.n);
    for (const auto& a : assessments) {
        total.push_back(a.total_score);
        social.push_back(a.social_score);
        emotional.push_back(a.emotional_score);
        ++out.category_counts[static_cast<std::size_t>(a.category)];
        if (a.overall_high) ++out.high_count;
        else ++out.low_count;
    }
    out.total = stats_of(total);
    out.social = stats_of(social);
    out.emotional = stats_of(emotional);
    const double n = static_cast<double>(out.n);
    for (int c = 0; c < kNumCategories; ++c) {
        out.category_percent[static_cast<std::size_t>(c)] =
            round_half_up(100.0 * static_cast<double>(out.category_counts[static_cast<std::size_t>(c)]) / n, 2);
    }
    out.low_percent = round_half_up(100.0 * static_cast<double>(out.low_count) / n, 2);
    out.high_percent = round_half_up(100.0 * static_cast<double>(out.high_count) / n, 2);
    return out;
}

UclaParseResult load_ucla_csv(const std::string& path) {
    CsvReader reader = CsvReader::open(path);
    std::vector<std::string> expected = {"participant_id"};
    for (int i = 1; i <= 10; ++i) expected.push_back("item_" + std::to_string(i));
    if (reader.header() != expected) {
        throw ValidationError(path + ": header does not match ucla_post schema");
    }
    UclaParseResult out;
    std::vector<std::string_view> fields;
    while (reader.next_row(fields)) {
        if (fields.size() != expected.size()) {
            out.rejected.emplace_back(reader.line_number(), "wrong field count");
            continue;
        }
        std::array<int, 10> raw{};
        bool ok = true;
        for (int i = 0; i < 10; ++i) {
            auto v = parse_int(fields[static_cast<std::size_t>(i + 1)]);
            if (!v || *v < 1 || *v > 4) {
                out.rejected.emplace_back(reader.line_number(),
                                          "item_" + std::to_string(i + 1) + " missing or outside 1..4");
                ok = false;
                break;
            }
            raw[static_cast<std::size_t>(i)] = static_cast<int>(*v);
        }
        if (!ok) continue;
        if (fields[0].empty()) {
            out.rejected.emplace_back(reader.line_number(), "empty participant_id");
            continue;
        }
        out.assessments.push_back(score_ucla(std::string(fields[0]), raw));
    }
    std::sort(out.assessments.begin(), out.assessments.end(),
              [](const Assessment& a, const Assessment& b) { return a.participant_id < b.participant_id; });
    return out;
}

void write_labels_csv(const std::string& path, const std::vector<Assessment>& assessments) {
    CsvWriter w(path, {"participant_id", "social_score", "emotional_score", "total_score", "category",
                       "overall_binary"});
    for (const auto& a : assessments) {
        w.write_row({a.participant_id, format_int(a.social_score), format_int(a.emotional_score),
                     format_int(a.total_score), category_name(a.category), a.overall_high ? "high" : "low"});
    }
    w.close();
}

std::vector<Assessment> load_labels_csv(const std::string& path) {
    CsvReader reader = CsvReader::open(path);
    const std::vector<std::string> expected = {"participant_id", "social_score", "emotional_score",
                                               "total_score",    "category",     "overall_binary"};
    if (reader.header() != expected) {
        throw ValidationError(path + ": header does not match labels schema");
    }
    std::vector<Assessment> out;
    std::vector<std::string_view> fields;
    while (reader.next_row(fields)) {
        if (fields.size() != expected.size()) {
            throw ValidationError(path + ": malformed row at line " + std::to_string(reader.line_number()));
        }
        Assessment a;
        a.participant_id = std::string(fields[0]);
        auto social = parse_int(fields[1]);
        auto emotional = parse_int(fields[2]);
        auto total = parse_int(fields[3]);
        if (!social || !emotional || !total) {
            throw ValidationError(path + ": malformed scores at line " + std::to_string(reader.line_number()));
        }
        a.social_score = static_cast<int>(*social);
        a.emotional_score = static_cast<int>(*emotional);
        a.total_score = static_cast<int>(*total);
        a.category = category_from_name(std::string(fields[4]));
        a.overall_high = fields[5] == "high";
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace biomlab::labeling
