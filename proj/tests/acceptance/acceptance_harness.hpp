#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace acceptance {

struct CriterionResult {
    int number;
    std::string name;
    bool passed;
    std::string detail;
};

class Harness {
public:
    void record(int number, const std::string& name, bool passed, const std::string& detail) {
        results_.push_back({number, name, passed, detail});
        std::cout << (passed ? "PASS" : "FAIL") << " criterion " << number << " [" << name
                  << "] " << detail << std::endl;
    }

    int summarize() const {
        int failed = 0;
        for (const auto& r : results_) {
            failed += r.passed ? 0 : 1;
        }
        std::cout << "\n" << (results_.size() - failed) << "/" << results_.size()
                  << " criteria passed" << std::endl;
        return failed == 0 ? 0 : 1;
    }

private:
    std::vector<CriterionResult> results_;
};

// criteria evaluated from closed forms and small problems (seconds)
void run_analysis_criteria(Harness& harness);

// criteria requiring full training runs (minutes)
void run_training_criteria(Harness& harness, const std::string& work_dir);

} // namespace acceptance
