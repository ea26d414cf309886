# unit tests package