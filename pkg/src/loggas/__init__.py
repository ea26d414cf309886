# loggas package
