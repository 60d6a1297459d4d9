#pragma once

#include <string>
#include <vector>

#include "harmonize/existence.hpp"
#include "harmonize/simulate.hpp"

namespace harmonize {

inline constexpr const char* kSchema = "harmonize/1";

// 17 significant digits. The JSON writer and CSV tables print non-finite
// values as null and as an empty cell.
std::string format_double(double x);

// Streaming writer with insertion-ordered keys and 2-space indentation.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(double x);
    JsonWriter& value(long long x);
    JsonWriter& value(bool b);
    JsonWriter& value(const std::string& s);
    JsonWriter& value(const char* s) { return value(std::string(s)); }
    JsonWriter& null();

    const std::string& str() const { return out_; }

private:
    void before_value();
    void newline();

    struct Frame {
        bool object;
        int count;
    };
    std::string out_;
    std::vector<Frame> stack_;
    bool after_key_ = false;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const;
};

std::string csv_bool(bool b);

std::string existence_json(const ExistenceReport& r, const std::string& command = "check");
CsvTable existence_csv(const ExistenceReport& r);
ExistenceReport existence_from_json(const std::string& text);

// `existence` supplies the decision block of the bounds schema.
std::string bounds_json(const ExistenceReport& existence, const BoundReport& b);
CsvTable bounds_csv(const BoundReport& b);
BoundReport bounds_from_json(const std::string& text);

// Moment table with an optional closed-form reference (NaN when unknown).
struct MomentReport {
    std::string control;  // ControlSpec::describe()
    std::vector<FieldPoint> points;
    MomentTable table;
    std::vector<double> reference_cov;  // points x points, may be empty
};
std::string moments_json(const MomentReport& m);
CsvTable moments_csv(const MomentReport& m);

std::string point_label(const FieldPoint& p);

}  // namespace harmonize
