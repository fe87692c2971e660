namespace navforge {}
