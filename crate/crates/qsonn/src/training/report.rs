//! Per-run training records and their CSV/JSON export.

/// One epoch's numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: u32,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub seconds: f64,
}

/// Full record of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: u32,
    pub best_val_acc: f64,
    /// Test accuracy of the best checkpoint; absent when the test split is
    /// empty.
    pub test_acc: Option<f64>,
}

impl TrainReport {
    /// CSV with the columns `epoch,train_loss,train_acc,val_acc,seconds`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,train_acc,val_acc,seconds\n");
        for r in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.epoch, r.train_loss, r.train_acc, r.val_acc, r.seconds
            ));
        }
        out
    }

    /// JSON summary with `best_epoch`, `best_val_acc`, `test_acc` and the
    /// per-epoch records.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        out.push_str(&format!("\"best_epoch\":{},", self.best_epoch));
        out.push_str(&format!("\"best_val_acc\":{},", self.best_val_acc));
        match self.test_acc {
            Some(acc) => out.push_str(&format!("\"test_acc\":{acc},")),
            None => out.push_str("\"test_acc\":null,"),
        }
        out.push_str("\"epochs\":[");
        for (i, r) in self.epochs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"epoch\":{},\"train_loss\":{},\"train_acc\":{},\"val_acc\":{},\"seconds\":{}}}",
                r.epoch, r.train_loss, r.train_acc, r.val_acc, r.seconds
            ));
        }
        out.push_str("]}");
        out
    }

    /// Equality of everything except the wall-clock column, which is the one
    /// nondeterministic field of an otherwise seeded run.
    pub fn same_trajectory(&self, other: &TrainReport) -> bool {
        self.best_epoch == other.best_epoch
            && self.best_val_acc == other.best_val_acc
            && self.test_acc == other.test_acc
            && self.epochs.len() == other.epochs.len()
            && self.epochs.iter().zip(&other.epochs).all(|(a, b)| {
                a.epoch == b.epoch
                    && a.train_loss == b.train_loss
                    && a.train_acc == b.train_acc
                    && a.val_acc == b.val_acc
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrainReport {
        TrainReport {
            epochs: vec![
                EpochRecord {
                    epoch: 1,
                    train_loss: 2.3,
                    train_acc: 0.1,
                    val_acc: 0.12,
                    seconds: 1.5,
                },
                EpochRecord {
                    epoch: 2,
                    train_loss: 1.9,
                    train_acc: 0.3,
                    val_acc: 0.29,
                    seconds: 1.4,
                },
            ],
            best_epoch: 2,
            best_val_acc: 0.29,
            test_acc: Some(0.25),
        }
    }

    #[test]
    fn csv_has_documented_columns() {
        let csv = sample().to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "epoch,train_loss,train_acc,val_acc,seconds"
        );
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn json_contains_summary_fields() {
        let json = sample().to_json();
        assert!(json.contains("\"best_epoch\":2"));
        assert!(json.contains("\"test_acc\":0.25"));
        assert!(json.contains("\"epochs\":["));
        let none = TrainReport {
            test_acc: None,
            ..sample()
        };
        assert!(none.to_json().contains("\"test_acc\":null"));
    }

    #[test]
    fn same_trajectory_ignores_seconds() {
        let a = sample();
        let mut b = sample();
        b.epochs[0].seconds = 99.0;
        assert!(a.same_trajectory(&b));
        b.epochs[0].val_acc = 0.5;
        assert!(!a.same_trajectory(&b));
    }
}
