"""
Configuration settings for the rtkit reproduction number toolkit
"""

import os
from typing import Dict, List, Optional

class Config:
    """Configuration class for the application"""
    
    # Directory settings
    DEFAULT_DATA_DIR = "data"
    DEFAULT_OUTPUT_DIR = "output"
    LOG_DIR = "logs"
    SNAPSHOT_SUBDIR = "raw"
    DATA_DIR_ENV = "RTKIT_DATA_DIR"
    
    # Feed settings: feed name -> file role -> URL
    CSSE_BASE_URL = (
        "https://raw.githubusercontent.com/CSSEGISandData/COVID-19/master/"
        "csse_covid_19_data"
    )
    FEED_URLS = {
        'csse': {
            'confirmed': CSSE_BASE_URL + "/csse_covid_19_time_series/time_series_covid19_confirmed_global.csv",
            'recovered': CSSE_BASE_URL + "/csse_covid_19_time_series/time_series_covid19_recovered_global.csv",
            'deaths': CSSE_BASE_URL + "/csse_covid_19_time_series/time_series_covid19_deaths_global.csv",
            'population': CSSE_BASE_URL + "/UID_ISO_FIPS_LookUp_Table.csv",
        },
        'mobility': {
            'mobility': (
                "https://covid19-static.cdn-apple.com/covid19-mobility-data/"
                "2025HotfixDev5/v3/en-us/applemobilitytrends-2022-04-12.csv"
            ),
        },
    }
    REQUIRED_ROLES = ['confirmed', 'recovered', 'deaths', 'population', 'mobility']
    
    # HTTP settings
    DEFAULT_TIMEOUT = 60
    DEFAULT_RETRY_ATTEMPTS = 3
    
    # SEIR model settings
    DEFAULT_GAMMA = 1.0 / 30.0
    DEFAULT_K = 1.0 / 5.0
    SUBSTEPS_PER_DAY = 10
    
    # Estimator settings
    WINDOW_DAYS = 7
    CASE_THRESHOLD = 1000
    INCUBATION_SHIFT_DAYS = 5
    ASYMPTOMATIC_FRACTION = 0.43
    
    # Optimizer settings
    BETA_BOUNDS = (0.0, 2.0)
    X_TOLERANCE = 1e-6
    MAX_ITERATIONS = 200
    SCAN_PROBES = 17
    
    # Model-free estimator settings
    MF_NUMERATOR_DAYS = 4
    MF_DENOMINATOR_DAYS = 4
    
    # Smoothing settings
    CASE_SMOOTHING_DAYS = 3
    MOBILITY_SMOOTHING_DAYS = 7
    MAX_INTERPOLATED_GAP_DAYS = 3
    MOBILITY_STREAMS = ['driving', 'walking', 'transit']
    
    # Analysis settings
    DEFAULT_END_DATE = "2020-12-31"
    DEFAULT_SHIFTS = (-21, 21)
    DEFAULT_WORKERS = 4
    MIN_CORRELATION_PAIRS = 3
    
    # Default analysis set; other countries go through --countries
    DEFAULT_COUNTRIES = [
        'US',
        'United Kingdom',
        'Sweden',
        'Japan',
        'India',
        'Brazil',
        'Israel',
        'Korea, South',
        'Italy',
        'Germany',
        'Spain',
    ]
    
    # Aliases between the CSSE and Apple feeds, mapped to the CSSE spelling
    COUNTRY_ALIASES = {
        'united states': 'US',
        'united states of america': 'US',
        'usa': 'US',
        'uk': 'United Kingdom',
        'great britain': 'United Kingdom',
        'republic of korea': 'Korea, South',
        'south korea': 'Korea, South',
        'korea': 'Korea, South',
        'czech republic': 'Czechia',
        'taiwan': 'Taiwan*',
        'burma': 'Myanmar',
        'ivory coast': "Cote d'Ivoire",
        'macao': 'Macau',
    }
    
    # Logging settings
    LOG_LEVEL = "INFO"
    LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    
    @classmethod
    def normalize_country(cls, name: str) -> str:
        """Map a country name from either feed onto its CSSE spelling"""
        cleaned = str(name).strip()
        return cls.COUNTRY_ALIASES.get(cleaned.lower(), cleaned)
    
    @classmethod
    def same_country(cls, left: str, right: str) -> bool:
        """Check whether two feed spellings refer to the same country"""
        return cls.normalize_country(left).lower() == cls.normalize_country(right).lower()
    
    @classmethod
    def get_feed_urls(cls, feed: Optional[str] = None) -> Dict[str, Dict[str, str]]:
        """Get the configured URLs, optionally for a single feed"""
        if feed is None:
            return cls.FEED_URLS
        if feed not in cls.FEED_URLS:
            raise ValueError(f"Unsupported feed: {feed}")
        return {feed: cls.FEED_URLS[feed]}
    
    @classmethod
    def get_data_dir(cls, data_dir: Optional[str] = None) -> str:
        """Resolve the data directory: explicit value, then environment, then default"""
        if data_dir:
            return data_dir
        return os.environ.get(cls.DATA_DIR_ENV) or cls.DEFAULT_DATA_DIR
    
    @classmethod
    def ensure_directories(cls, *extra: str):
        """Ensure required directories exist"""
        os.makedirs(cls.LOG_DIR, exist_ok=True)
        for directory in extra:
            os.makedirs(directory, exist_ok=True)
    
    @classmethod
    def get_default_countries(cls) -> List[str]:
        """Get a copy of the default country panel"""
        return list(cls.DEFAULT_COUNTRIES)
