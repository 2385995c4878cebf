import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def pytest_configure(config):
    config.addinivalue_line(
        'markers', 'slow: reproduction runs on the Cardiotocography data '
        '(needs DMKDE_CARDIO_CSV)')
