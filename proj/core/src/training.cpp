#include "ssvep/training.hpp"

#include <cstdio>
#include <fstream>

#include "ssvep/error.hpp"

namespace ssvep {

void write_log_csv(const std::vector<EpochLog>& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "epoch,train_loss,val_loss,val_acc\n";
  char line[128];
  for (const auto& e : log) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.6f\n", e.epoch, e.train_loss, e.val_loss,
                  e.val_acc);
    out << line;
  }
}

}  // namespace ssvep
