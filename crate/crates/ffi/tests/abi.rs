use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use fakescope_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fs_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn scalar_functions_and_error_codes() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(fs_ari(c("The cat sat on the mat.").as_ptr(), &mut v), FS_OK);
        assert!((v + 5.085).abs() < 1e-9);
        assert_eq!(fs_reading_time(c(&"x".repeat(100)).as_ptr(), &mut v), FS_OK);
        assert_eq!(v, 1.469);

        assert_eq!(fs_ari(ptr::null(), &mut v), FS_ERR_NULL);
        assert!(last_error().contains("text"));
        assert_eq!(fs_ari(c("words.").as_ptr(), ptr::null_mut()), FS_ERR_NULL);
        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(fs_ari(bad.as_ptr().cast(), &mut v), FS_ERR_UTF8);
        assert_eq!(fs_ari(c("").as_ptr(), &mut v), FS_ERR_INVALID);
    }
    let version = unsafe { CStr::from_ptr(fs_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn anova_over_flat_groups() {
    let values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let sizes = [3usize, 3];
    let (mut f, mut p) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            fs_anova_oneway(values.as_ptr(), sizes.as_ptr(), 2, &mut f, &mut p),
            FS_OK
        );
        assert!((f - 13.5).abs() < 1e-9);
        assert!((p - 0.0213).abs() < 1e-3);
        assert_eq!(
            fs_anova_oneway(values.as_ptr(), sizes.as_ptr(), 1, &mut f, &mut p),
            FS_ERR_INVALID
        );
        assert_eq!(
            fs_anova_oneway(ptr::null(), sizes.as_ptr(), 2, &mut f, &mut p),
            FS_ERR_NULL
        );
    }
}

#[test]
fn pipeline_detector_and_language_model_handles() {
    let dir = tempfile::tempdir().unwrap();
    let out = c(dir.path().to_str().unwrap());
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/reviews.jsonl");
    let corpus = c(corpus.to_str().unwrap());
    unsafe {
        // Nothing trained yet: the error names the stage to run.
        let mut det = ptr::null_mut();
        assert_eq!(
            fs_detector_open(out.as_ptr(), FS_DETECTOR_DEFAULT, &mut det),
            FS_ERR_IO
        );
        assert!(last_error().contains("fakescope train"), "{}", last_error());
        assert!(det.is_null());

        let mut pipe = ptr::null_mut();
        assert_eq!(
            fs_pipeline_new(c(r#"{"seed": 5}"#).as_ptr(), out.as_ptr(), &mut pipe),
            FS_OK
        );
        assert_eq!(
            fs_pipeline_run_stage(pipe, c("bogus").as_ptr(), ptr::null()),
            FS_ERR_INVALID
        );
        assert_eq!(
            fs_pipeline_run_stage(pipe, c("run").as_ptr(), corpus.as_ptr()),
            FS_OK,
            "{}",
            last_error()
        );
        fs_pipeline_free(pipe);

        assert_eq!(
            fs_detector_open(out.as_ptr(), FS_DETECTOR_NAIVE_BAYES, &mut det),
            FS_OK
        );
        let mut score = -1.0;
        assert_eq!(
            fs_detector_score(det, c("The ramen was tasty.").as_ptr(), &mut score),
            FS_OK
        );
        assert!((0.0..=1.0).contains(&score));
        assert_eq!(
            fs_detector_score(ptr::null(), c("x").as_ptr(), &mut score),
            FS_ERR_NULL
        );
        fs_detector_free(det);
        assert_eq!(fs_detector_open(out.as_ptr(), 7, &mut det), FS_ERR_INVALID);

        let lm_path = c(dir.path().join("models/lm.tsv").to_str().unwrap());
        let mut lm = ptr::null_mut();
        assert_eq!(fs_lm_open(lm_path.as_ptr(), &mut lm), FS_OK);
        let (mut ppl, mut tc) = (0.0, f64::NAN);
        let text = c("The soup was good. We waited ten minutes. Parking is a pain.");
        assert_eq!(fs_lm_perplexity(lm, text.as_ptr(), &mut ppl), FS_OK);
        assert!(ppl >= 1.0);
        assert_eq!(fs_lm_coherence(lm, text.as_ptr(), 3, &mut tc), FS_OK);
        assert!(tc.is_finite());
        fs_lm_free(lm);
        fs_lm_free(ptr::null_mut());
    }
}

#[test]
fn bad_config_is_rejected() {
    let mut pipe = ptr::null_mut();
    unsafe {
        assert_eq!(
            fs_pipeline_new(c(r#"{"sede": 1}"#).as_ptr(), ptr::null(), &mut pipe),
            FS_ERR_INVALID
        );
    }
    assert!(pipe.is_null());
    assert!(last_error().contains("config"));
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fakescope.h"))
            .unwrap();
    for name in [
        "fs_last_error",
        "fs_version",
        "fs_ari",
        "fs_reading_time",
        "fs_anova_oneway",
        "fs_lm_open",
        "fs_lm_perplexity",
        "fs_lm_coherence",
        "fs_lm_free",
        "fs_detector_open",
        "fs_detector_score",
        "fs_detector_free",
        "fs_pipeline_new",
        "fs_pipeline_run_stage",
        "fs_pipeline_free",
        "typedef struct FsDetector FsDetector",
        "#define FS_ERR_PANIC -99",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
