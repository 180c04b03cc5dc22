//! Linear merge algorithms over strictly sorted slices.

use std::cmp::Ordering;

pub fn union<T: Ord + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn intersection<T: Ord + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn difference<T: Ord + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out
}

/// True iff every element of `a` occurs in `b`.
pub fn is_subset<T: Ord>(a: &[T], b: &[T]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut j = 0;
    for x in a {
        loop {
            match b.get(j).map(|y| y.cmp(x)) {
                None | Some(Ordering::Greater) => return false,
                Some(Ordering::Less) => j += 1,
                Some(Ordering::Equal) => {
                    j += 1;
                    break;
                }
            }
        }
    }
    true
}

pub fn insert<T: Ord + Clone>(a: &[T], x: &T) -> Option<Vec<T>> {
    let pos = a.binary_search(x).err()?;
    let mut out = Vec::with_capacity(a.len() + 1);
    out.extend_from_slice(&a[..pos]);
    out.push(x.clone());
    out.extend_from_slice(&a[pos..]);
    Some(out)
}

pub fn remove<T: Ord + Clone>(a: &[T], x: &T) -> Option<Vec<T>> {
    let pos = a.binary_search(x).ok()?;
    let mut out = Vec::with_capacity(a.len() - 1);
    out.extend_from_slice(&a[..pos]);
    out.extend_from_slice(&a[pos + 1..]);
    Some(out)
}

pub fn is_strictly_sorted<T: Ord>(a: &[T]) -> bool {
    a.windows(2).all(|w| w[0] < w[1])
}
