#include "otadpd/train_record.hpp"

#include <ostream>

namespace otadpd {

void write_train_records(std::ostream& os, const std::vector<TrainRecord>& recs) {
    os << "iteration,loss,grad_norm,power_dbm,ser,nmse_db,acpr_dbc\n";
    os.precision(12);
    for (const auto& r : recs)
        os << r.iteration << ',' << r.loss << ',' << r.grad_norm << ',' << r.power_dbm << ',' << r.ser << ','
           << r.nmse_db << ',' << r.acpr_dbc << '\n';
}

}  // namespace otadpd
