//! Serde adapters for maps with tuple keys. JSON objects require string
//! keys, so these maps serialize as flat row sequences instead; BTreeMap
//! ordering keeps the output byte-stable.

pub mod tuple2_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S, A, B, V>(map: &BTreeMap<(A, B), V>, ser: S) -> Result<S::Ok, S::Error>
    where
        S: Serializer,
        A: Serialize + Copy,
        B: Serialize + Copy,
        V: Serialize,
    {
        ser.collect_seq(map.iter().map(|(&(a, b), v)| (a, b, v)))
    }

    pub fn deserialize<'de, D, A, B, V>(de: D) -> Result<BTreeMap<(A, B), V>, D::Error>
    where
        D: Deserializer<'de>,
        A: Deserialize<'de> + Ord + Copy,
        B: Deserialize<'de> + Ord + Copy,
        V: Deserialize<'de>,
    {
        let rows: Vec<(A, B, V)> = Vec::deserialize(de)?;
        Ok(rows.into_iter().map(|(a, b, v)| ((a, b), v)).collect())
    }
}

pub mod tuple3_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S, A, B, C, V>(
        map: &BTreeMap<(A, B, C), V>,
        ser: S,
    ) -> Result<S::Ok, S::Error>
    where
        S: Serializer,
        A: Serialize + Copy,
        B: Serialize + Copy,
        C: Serialize + Copy,
        V: Serialize,
    {
        ser.collect_seq(map.iter().map(|(&(a, b, c), v)| (a, b, c, v)))
    }

    #[allow(clippy::type_complexity)]
    pub fn deserialize<'de, D, A, B, C, V>(de: D) -> Result<BTreeMap<(A, B, C), V>, D::Error>
    where
        D: Deserializer<'de>,
        A: Deserialize<'de> + Ord + Copy,
        B: Deserialize<'de> + Ord + Copy,
        C: Deserialize<'de> + Ord + Copy,
        V: Deserialize<'de>,
    {
        let rows: Vec<(A, B, C, V)> = Vec::deserialize(de)?;
        Ok(rows.into_iter().map(|(a, b, c, v)| ((a, b, c), v)).collect())
    }
}
