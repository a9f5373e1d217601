//! Minimal word-level edit scripts.

use crate::op::{EditOp, OpKind, Phrase};
use crate::token::{Sentence, Token};

/// Returns a minimal Insert/Delete/Substitute script turning `a` into `b`.
///
/// Ops are positioned for left-to-right application. At each step an optimal
/// substitution is preferred over an optimal deletion, which is preferred
/// over an optimal insertion. Reorders are never inferred.
pub fn diff(a: &Sentence, b: &Sentence) -> Vec<EditOp> {
    let (a, b) = (a.tokens(), b.tokens());
    let (n, m) = (a.len(), b.len());

    // suffix[i][j] = distance between a[i..] and b[j..]
    let width = m + 1;
    let mut suffix = vec![0usize; (n + 1) * width];
    let at = |i: usize, j: usize| i * width + j;
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            suffix[at(i, j)] = if i == n {
                m - j
            } else if j == m {
                n - i
            } else if a[i] == b[j] {
                suffix[at(i + 1, j + 1)]
            } else {
                1 + suffix[at(i + 1, j + 1)]
                    .min(suffix[at(i + 1, j)])
                    .min(suffix[at(i, j + 1)])
            };
        }
    }

    let word = |t: &Token| Phrase::from(t.clone());
    let mut script = Vec::with_capacity(suffix[0]);
    let (mut i, mut j) = (0, 0);
    // The working sentence is b[..j] ++ a[i..], so the cursor position is j.
    while i < n || j < m {
        let here = suffix[at(i, j)];
        if i < n && j < m && a[i] == b[j] {
            i += 1;
            j += 1;
        } else if i < n && j < m && here == 1 + suffix[at(i + 1, j + 1)] {
            script.push(
                OpKind::Substitute {
                    position: j,
                    span: 1,
                    text: word(&b[j]),
                }
                .typed(),
            );
            i += 1;
            j += 1;
        } else if i < n && here == 1 + suffix[at(i + 1, j)] {
            script.push(OpKind::delete(j).typed());
            i += 1;
        } else {
            script.push(
                OpKind::Insert {
                    position: j,
                    text: word(&b[j]),
                }
                .typed(),
            );
            j += 1;
        }
    }
    script
}
