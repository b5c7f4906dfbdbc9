#pragma once

#include <iosfwd>
#include <vector>

namespace otadpd {

// One row per training iteration. NaN marks a field the trainer did not compute.
struct TrainRecord {
    int iteration = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double power_dbm = 0.0;
    double ser = 0.0;
    double nmse_db = 0.0;
    double acpr_dbc = 0.0;
};

void write_train_records(std::ostream& os, const std::vector<TrainRecord>& recs);

}  // namespace otadpd
