#pragma once

#include <filesystem>
#include <limits>
#include <vector>

namespace ssvep {

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;

  bool operator==(const EpochLog&) const = default;
};

// Tracks the minimum validation loss. Training stops once `patience`
// consecutive epochs fail to improve on it, so patience 0 stops after the
// first epoch.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when `val_loss` is a new minimum.
  bool update(int epoch, double val_loss) {
    if (val_loss < best_) {
      best_ = val_loss;
      best_epoch_ = epoch;
      since_best_ = 0;
      return true;
    }
    ++since_best_;
    return false;
  }

  bool should_stop() const { return since_best_ >= patience_; }
  double best_loss() const { return best_; }
  int best_epoch() const { return best_epoch_; }

 private:
  int patience_;
  int since_best_ = 0;
  int best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

// CSV with header "epoch,train_loss,val_loss,val_acc".
void write_log_csv(const std::vector<EpochLog>& log, const std::filesystem::path& path);

}  // namespace ssvep
