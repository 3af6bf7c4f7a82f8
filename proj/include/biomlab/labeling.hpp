#pragma once

#include <array>
#include <string>
#include <vector>

#include "biomlab/common.hpp"

namespace biomlab::labeling {

// Four-way loneliness categories. The integer order doubles as the class
// index everywhere downstream (models, metrics, SHAP).
enum class Category { SociallyLonely = 0, EmotionallyLonely = 1, BothLonely = 2, NotLonely = 3 };
constexpr int kNumCategories = 4;

const char* category_name(Category c);          // "socially_lonely", ...
Category category_from_name(const std::string& name);

enum class Subscale { Social, Emotional };

struct ItemSpec {
    int item_id;  // 1..10, file column order
    Subscale subscale;
    bool reverse_scored;
};

// Items 1..5 are the emotional subscale (items 2,3,4 reverse-scored);
// items 6..10 are the social subscale (items 6 and 9 reverse-scored).
const std::array<ItemSpec, 10>& ucla_items();

struct Assessment {
    std::string participant_id;
    std::array<int, 10> responses{};  // raw 1..4 by item_id order
    int social_score = 0;             // 5..20
    int emotional_score = 0;          // 5..20
    int total_score = 0;              // 10..40
    Category category = Category::NotLonely;
    bool overall_high = false;
};

// Scores one complete response set (10 raw values, each 1..4). Reverse items
// map v -> 5-v before summing. Throws ValidationError on missing/out-of-range
// responses: partial surveys are rejected, never partially scored.
Assessment score_ucla(const std::string& participant_id, const std::array<int, 10>& raw_responses);

Category categorize(int social_score, int emotional_score);

// Overall binary split of the total score: <=20 low, >20 high.
bool overall_binary_high(int total_score);

struct ScoreStats {
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double sd = 0.0;  // population
};

struct CohortSummary {
    std::size_t n = 0;
    ScoreStats total;
    ScoreStats social;
    ScoreStats emotional;
    std::array<std::size_t, kNumCategories> category_counts{};
    std::array<double, kNumCategories> category_percent{};  // 2-decimal half-up
    std::size_t low_count = 0;
    std::size_t high_count = 0;
    double low_percent = 0.0;
    double high_percent = 0.0;
};

CohortSummary cohort_summary(const std::vector<Assessment>& assessments);

// ucla_post.csv: participant_id,item_1..item_10. Rows that fail scoring are
// rejected with a reason; callers decide whether to surface or fail.
struct UclaParseResult {
    std::vector<Assessment> assessments;
    std::vector<std::pair<std::size_t, std::string>> rejected;  // (line, reason)
};
UclaParseResult load_ucla_csv(const std::string& path);

void write_labels_csv(const std::string& path, const std::vector<Assessment>& assessments);
std::vector<Assessment> load_labels_csv(const std::string& path);

}  // namespace biomlab::labeling
