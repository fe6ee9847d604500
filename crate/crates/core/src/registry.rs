//! Name-keyed registries of interchangeable algorithm strategies.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered map from names to shared strategy objects.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(String, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds or replaces the strategy stored under `name`.
    pub fn register(&mut self, name: &str, item: Arc<T>) -> &mut Self {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name.to_string(), item)),
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| Arc::clone(s))
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names(),
            })
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|(n, _)| n.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greet: Send + Sync {
        fn hello(&self) -> &'static str;
    }
    struct A;
    struct B;
    impl Greet for A {
        fn hello(&self) -> &'static str {
            "a"
        }
    }
    impl Greet for B {
        fn hello(&self) -> &'static str {
            "b"
        }
    }

    #[test]
    fn lookup_and_replace() {
        let mut r: Registry<dyn Greet> = Registry::new("greeter");
        r.register("x", Arc::new(A)).register("y", Arc::new(B));
        assert_eq!(r.get("x").unwrap().hello(), "a");
        r.register("x", Arc::new(B));
        assert_eq!(r.get("x").unwrap().hello(), "b");
        assert_eq!(r.names(), vec!["x", "y"]);
        match r.get("z") {
            Err(Error::UnknownStrategy {
                kind, available, ..
            }) => {
                assert_eq!(kind, "greeter");
                assert_eq!(available.len(), 2);
            }
            _ => panic!("expected unknown strategy"),
        }
    }
}
