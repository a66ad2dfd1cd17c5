//! Locally generated replicas of rule-defined UCI datasets.
//!
//! These benchmark datasets are fully determined by published rules, so the
//! harness reproduces them bit-for-bit instead of downloading: the tic-tac-toe
//! endgame set (every reachable final board), the three MONK's problems (the
//! full 432-point attribute space labeled by each problem's target rule) and
//! balance-scale (all 625 weight/distance combinations labeled by moment
//! comparison). Observational datasets cannot be synthesized and go through
//! `scripts/fetch_uci.sh` instead.

use std::collections::BTreeSet;

/// Every final tic-tac-toe board (x moves first, game stops at a win or a
/// full board), labeled `positive` iff x has won. 958 boards, 626 positive.
pub fn tic_tac_toe_csv() -> String {
    const LINES: [[usize; 3]; 8] = [
        [0, 1, 2],
        [3, 4, 5],
        [6, 7, 8],
        [0, 3, 6],
        [1, 4, 7],
        [2, 5, 8],
        [0, 4, 8],
        [2, 4, 6],
    ];

    fn winner(board: &[u8; 9], player: u8) -> bool {
        LINES
            .iter()
            .any(|line| line.iter().all(|&i| board[i] == player))
    }

    fn walk(board: &mut [u8; 9], player: u8, finals: &mut BTreeSet<[u8; 9]>) {
        for cell in 0..9 {
            if board[cell] != 0 {
                continue;
            }
            board[cell] = player;
            if winner(board, player) || board.iter().all(|&c| c != 0) {
                finals.insert(*board);
            } else {
                walk(board, 3 - player, finals);
            }
            board[cell] = 0;
        }
    }

    let mut finals = BTreeSet::new();
    walk(&mut [0u8; 9], 1, &mut finals);

    let mut out = String::from(
        "top_left,top_middle,top_right,middle_left,middle_middle,middle_right,\
         bottom_left,bottom_middle,bottom_right,class\n",
    );
    for board in finals {
        for &cell in &board {
            out.push(match cell {
                0 => 'b',
                1 => 'x',
                _ => 'o',
            });
            out.push(',');
        }
        out.push_str(if winner(&board, 1) { "positive" } else { "negative" });
        out.push('\n');
    }
    out
}

/// Attribute cardinalities of the MONK's problems.
const MONKS_CARDS: [usize; 6] = [3, 3, 2, 3, 4, 2];

/// The full 432-point MONK's attribute space labeled by the target rule of
/// problem 1, 2 or 3 (noise-free).
pub fn monks_csv(problem: u8) -> String {
    assert!((1..=3).contains(&problem), "MONK's problems are 1..=3");
    let rule = |a: &[usize; 6]| -> bool {
        match problem {
            1 => a[0] == a[1] || a[4] == 1,
            2 => a.iter().filter(|&&v| v == 1).count() == 2,
            _ => (a[4] == 3 && a[3] == 1) || (a[4] != 4 && a[1] != 3),
        }
    };

    let mut out = String::from("a1,a2,a3,a4,a5,a6,class\n");
    let mut attrs = [1usize; 6];
    loop {
        let label = if rule(&attrs) { "1" } else { "0" };
        let row: Vec<String> = attrs.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push(',');
        out.push_str(label);
        out.push('\n');

        // Odometer over attribute values, most significant first.
        let mut i = 6;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if attrs[i] < MONKS_CARDS[i] {
                attrs[i] += 1;
                break;
            }
            attrs[i] = 1;
        }
    }
}

/// All 625 balance-scale states: class L/B/R by comparing the left and right
/// moments (weight times distance).
pub fn balance_scale_csv() -> String {
    let mut out = String::from("left_weight,left_distance,right_weight,right_distance,class\n");
    for lw in 1..=5usize {
        for ld in 1..=5usize {
            for rw in 1..=5usize {
                for rd in 1..=5usize {
                    let class = match (lw * ld).cmp(&(rw * rd)) {
                        std::cmp::Ordering::Greater => "L",
                        std::cmp::Ordering::Equal => "B",
                        std::cmp::Ordering::Less => "R",
                    };
                    out.push_str(&format!("{lw},{ld},{rw},{rd},{class}\n"));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_rows(csv: &str, label: &str) -> (usize, usize) {
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        let hits = rows
            .iter()
            .filter(|row| row.rsplit(',').next() == Some(label))
            .count();
        (rows.len(), hits)
    }

    #[test]
    fn tic_tac_toe_has_the_known_shape() {
        let csv = tic_tac_toe_csv();
        let (total, positive) = count_rows(&csv, "positive");
        assert_eq!(total, 958);
        assert_eq!(positive, 626);
    }

    #[test]
    fn monks_full_spaces_have_the_known_positive_counts() {
        // Positives per rule, by direct combinatorics over the 432 points:
        // problem 1: |a1=a2| + |a5=1| - overlap = 144 + 108 - 36;
        // problem 2: sum over attribute pairs of the off-value products;
        // problem 3: 36 + 216 - 24.
        let expected = [(1u8, 216usize), (2, 142), (3, 228)];
        for (problem, positives) in expected {
            let csv = monks_csv(problem);
            let (total, hits) = count_rows(&csv, "1");
            assert_eq!(total, 432, "problem {problem}");
            assert_eq!(hits, positives, "problem {problem}");
        }
    }

    #[test]
    fn balance_scale_has_the_known_class_counts() {
        let csv = balance_scale_csv();
        let (total, balanced) = count_rows(&csv, "B");
        let (_, left) = count_rows(&csv, "L");
        let (_, right) = count_rows(&csv, "R");
        assert_eq!(total, 625);
        assert_eq!(balanced, 49);
        assert_eq!(left, 288);
        assert_eq!(right, 288);
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(tic_tac_toe_csv(), tic_tac_toe_csv());
        assert_eq!(monks_csv(2), monks_csv(2));
    }
}
