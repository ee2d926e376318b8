# Tests for twistcube
