# Tests for brinkfront
